// Check that `Psi = sigma - 1` is a scaffold for `x^5 - x = t^-3`, then
// promote it to infinite precision using `Psi^5 = 0`.

use galois_scaffold::scaffold;
use galois_scaffold::{Extension, ExtensionSpec, Result, Scaffold};

fn main() -> Result<()> {
    let ext = Extension::build(&ExtensionSpec::simple(5, &[3]), 32)?;
    let fam = ext.lambda_family();
    let s = Scaffold::sigma_minus_one(&ext);

    let report = scaffold::verify_scaffold(&ext, &fam, &s.psi, 4)?;
    for case in &report.cases {
        println!("t = {:>2}  active {:<5}  margin {}", case.t, case.active, case.margin);
    }
    println!("certified precision {}", report.certified_precision);

    let promoted = scaffold::charp_promotion(&ext, &s)?;
    println!("promoted to {:?}: {}", promoted.precision, promoted.annotations.join("; "));

    let identity = Scaffold::new(vec![galois_scaffold::GroupAlgebraElem::identity(&ext)]);
    match scaffold::verify_scaffold(&ext, &fam, &identity.psi, 4) {
        Err(e) => println!("identity: {e}"),
        Ok(_) => unreachable!("the identity does not lower valuations"),
    }
    Ok(())
}
