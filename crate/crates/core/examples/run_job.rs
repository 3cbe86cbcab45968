// Batch jobs: parse a TOML config, run a task, print the certificate.

use galois_scaffold::job::{self, Format, JobConfig, Task};
use galois_scaffold::Result;

const CONFIG: &str = r#"
seed = 11

[extension]
p = 2
generators = [{ exponent = 1 }, { exponent = 3 }]
"#;

fn main() -> Result<()> {
    let config = JobConfig::from_toml(CONFIG)?;
    let cert = job::run(&config, Task::Roundtrip)?;
    print!("{}", cert.emit(Format::Text));
    assert_eq!(cert.to_json(), job::run(&config, Task::Roundtrip)?.to_json());

    let bad = JobConfig::from_toml("[extension]\np = 2\n").unwrap_err();
    println!("malformed config: {bad}");
    Ok(())
}
