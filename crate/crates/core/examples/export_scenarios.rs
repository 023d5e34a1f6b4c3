//! Writes every built-in scenario as JSON into the directory given as the
//! first argument (default `scenarios`).

use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "scenarios".into()),
    );
    std::fs::create_dir_all(&dir)?;
    for s in tbopt::builtin_scenarios() {
        let path = dir.join(format!("{}.json", s.name));
        std::fs::write(&path, s.to_json() + "\n")?;
        println!("{}", path.display());
    }
    Ok(())
}
