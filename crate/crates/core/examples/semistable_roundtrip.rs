// A degree-9 tower with congruent breaks: find a stable witness, build a
// scaffold from it, verify, and recover a witness from the scaffold.

use galois_scaffold::{diagram, scaffold};
use galois_scaffold::{Extension, ExtensionSpec, Precision, Result};

fn main() -> Result<()> {
    let ext = Extension::build(&ExtensionSpec::simple(3, &[1, 4]), 48)?;
    let fam = ext.lambda_family();
    println!("breaks {:?}, i0 {}, congruent {:?}", ext.breaks(), ext.i0(), scaffold::breaks_congruence(&ext));

    let family = scaffold::default_family(&ext, &fam, 0, 0);
    let (xi, verdict) = scaffold::find_semistable_witness(&ext, &fam, &family)?.expect("congruent breaks");
    println!("witness {}  (stable {})", xi.format(&ext), verdict.stable);

    let norm = diagram::normalize_witness(&ext, &fam, &xi)?;
    let mut built = scaffold::build_from_semistable(&ext, &fam, &norm)?;
    let report = scaffold::verify_scaffold(&ext, &fam, &built.psi, 4)?;
    built.precision = Some(Precision::Finite(report.certified_precision));
    for (i, psi) in built.psi.iter().enumerate() {
        println!("Psi_{} = {}", i + 1, psi.format(&ext));
    }
    println!("certified precision {}", report.certified_precision);

    let (back, prec) = scaffold::semistable_from_scaffold(&ext, &fam, &built)?;
    println!(
        "Psi^(p^n-2): d = {} (expected {}), semistable {}, stable {}, {} terms",
        prec.witness.diagram.d,
        prec.expected_d,
        prec.witness.semistable,
        prec.witness.stable,
        back.coeffs().iter().filter(|c| !c.is_zero()).count()
    );
    Ok(())
}
