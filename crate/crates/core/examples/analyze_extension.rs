// Ramification data of `x^3 - x = t^-1` and of a two-step tower over `F_2`.
//
// ```text
// cargo run --example analyze_extension
// ```

use galois_scaffold::{Extension, ExtensionSpec, Result};

fn report(ext: &Extension) {
    let r = ext.ramification();
    println!("degree {} over F_{}", ext.degree(), ext.base().residue_field().order());
    println!("  breaks      {:?}", r.breaks);
    println!("  different   {}", r.different);
    println!("  i0          {}", r.i0);
    for s in 1..ext.degree() {
        println!("  i_G{}  {}", ext.automorphism(s), r.i_g[s]);
    }
    println!("  uniformizer {}", ext.format(ext.uniformizer()));
    println!("  a table     {:?}", ext.digits().a_table());
    println!("  b table     {:?}", ext.digits().b_table());
}

fn main() -> Result<()> {
    let ext = Extension::build(&ExtensionSpec::simple(3, &[1]), 32)?;
    report(&ext);
    assert_eq!((ext.breaks(), ext.i0()), (&[1][..], 2));

    // x_2 - x_1^5 lowers the valuation of the second generator, so the second
    // break is 9 rather than 5.
    let tower = Extension::build(&ExtensionSpec::simple(2, &[1, 5]), 32)?;
    report(&tower);
    assert_eq!(tower.breaks(), &[1, 9]);
    Ok(())
}
