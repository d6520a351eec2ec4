//! `manifest.csv`: every file in the output directory with the subcommand
//! and config hash that produced it.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

pub const HEADER: &str = "file,subcommand,config_hash";

/// Merges `files` into `<out>/manifest.csv`. Rows for files already listed
/// are replaced; rows from other subcommands are kept.
pub fn record(out: &Path, subcommand: &str, hash: &str, files: &[String]) -> io::Result<()> {
    let path = out.join("manifest.csv");
    let mut rows: BTreeMap<String, (String, String)> = BTreeMap::new();
    if let Ok(text) = fs::read_to_string(&path) {
        for line in text.lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() == 3 {
                rows.insert(cols[0].to_string(), (cols[1].to_string(), cols[2].to_string()));
            }
        }
    }
    for f in files {
        rows.insert(f.clone(), (subcommand.to_string(), hash.to_string()));
    }
    let mut s = String::from(HEADER);
    s.push('\n');
    for (f, (cmd, h)) in rows {
        s.push_str(&format!("{f},{cmd},{h}\n"));
    }
    fs::write(path, s)
}
