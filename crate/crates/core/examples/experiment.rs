//! A small transmit-power sweep through the harness.

use beamspace::harness::{run_experiment, summarize, write_summary_csv, ExperimentConfig};

const CONFIG: &str = r#"
name = "example"
geometry = "ula:128"
users = 4
trials = 50
seed = 1

[channel]
paths_per_cluster = 10

[selection]
epsilon = 0.25

[sweep]
axis = "transmit_power_dbm"
values = [0.0, 20.0, 40.0]
"#;

fn main() -> beamspace::Result<()> {
    let cfg = ExperimentConfig::from_toml(CONFIG)?;
    let records = run_experiment(&cfg)?;
    eprintln!(
        "{} records, {} flagged",
        records.len(),
        records.iter().filter(|r| r.is_flagged()).count()
    );
    write_summary_csv(&summarize(&records), std::io::stdout().lock())
}
