//! Writing and reading HBWF field snapshots and running a configured simulation.

use hbk::cli::commands::simulate;
use hbk::cli::io::read_snapshot;
use hbk::cli::RunConfig;

fn main() -> hbk::error::Result<()> {
    let dir = std::env::temp_dir().join("hbk-snapshot-example");
    let cfg = RunConfig::from_toml_str(
        r#"
        output_dir = "unused"
        [integrator]
        t_end = 0.2
        record_every = 10
        "#,
        None,
    )?;
    std::fs::create_dir_all(&dir)?;
    simulate(&cfg, &dir)?;
    let (w, trailer) = read_snapshot(&dir.join("snapshots").join("w_00002.hbwf"))?;
    println!("grid {:?}, mean {:?}", w.grid(), w.mean().eigenvalues());
    println!("{}", trailer.unwrap_or_default().lines().next().unwrap_or(""));
    Ok(())
}
