// `p = 3`, breaks `(1, 4)`: `4 != -i0 (mod 9)`, so no scaffold exists, and
// the falsifier exhibits an element violating the witness criterion.

use galois_scaffold::scaffold::{self, FalsifierVerdict};
use galois_scaffold::{Extension, ExtensionSpec, Result};

fn main() -> Result<()> {
    let ext = Extension::build(&ExtensionSpec::simple(3, &[1, 2]), 48)?;
    let fam = ext.lambda_family();
    println!("breaks {:?}, i0 {}, congruent {:?}", ext.breaks(), ext.i0(), scaffold::breaks_congruence(&ext));

    let family = scaffold::default_family(&ext, &fam, 8, 1);
    match scaffold::criterion_c_falsifier(&ext, &fam, &family, 4, 1)? {
        FalsifierVerdict::Falsified { xi, lambda, lhs, rhs, .. } => {
            println!("falsified by xi = {xi}");
            println!("  v(xi(rho)) - v(rho) = {lhs} > {rhs} = v(xi({lambda})) - v({lambda})");
        }
        FalsifierVerdict::Consistent { tested } => println!("no violation among {tested} elements"),
    }
    Ok(())
}
