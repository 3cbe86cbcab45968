// Diagram of `sigma - 1` in degree 3, its normalization, and the same diagram
// recovered from the support of `phi^-1(xi)`.

use galois_scaffold::diagram::{self, PhiImage};
use galois_scaffold::{Extension, ExtensionSpec, GroupAlgebraElem, Result};

fn main() -> Result<()> {
    let ext = Extension::build(&ExtensionSpec::simple(3, &[1]), 32)?;
    let fam = ext.lambda_family();
    let xi = GroupAlgebraElem::sigma_minus_one(&ext, 1);

    let f: Vec<String> = (-3..6).map(|a| diagram::f_xi(&ext, &fam, &xi, a).to_string()).collect();
    println!("f_xi(-3..6) = {}", f.join(" "));

    let verdict = diagram::is_semistable_witness(&ext, &fam, &xi)?;
    let show = |v: &[diagram::Coset]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
    println!("d = {}  G = {}  N = {}", verdict.diagram.d, show(&verdict.diagram.g), show(&verdict.diagram.n));
    println!("semistable {}  stable {}", verdict.semistable, verdict.stable);

    let norm = diagram::normalize_witness(&ext, &fam, &xi)?;
    let nd = diagram::big_g(&ext, &fam, &norm)?;
    println!("normalized: {}  d = {}  N = {}", norm.format(&ext), nd.d, show(&nd.n));

    let beta = diagram::phi_inverse_oracle(&ext, &PhiImage::from_group_algebra(&ext, &xi))?;
    for (v, j) in diagram::tensor_support(&ext, &beta) {
        println!("  phi^-1(xi): coefficient of pi^{j} has valuation {v}");
    }
    Ok(())
}
