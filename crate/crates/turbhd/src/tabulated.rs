//! Loader for tabulated transmittance laws: CSV rows `t,weight`, `#` comments
//! and an optional header row.

use std::path::Path;

use turbhd_core::pdtc::TabulatedModel;

pub fn load_table(path: &Path) -> Result<TabulatedModel, String> {
    let file = std::fs::File::open(path).map_err(|e| format!("cannot open {}: {e}", path.display()))?;
    parse_table(file)
}

pub fn parse_table<R: std::io::Read>(input: R) -> Result<TabulatedModel, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut atoms = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        if record.len() != 2 {
            return Err(format!("row {}: expected 2 fields, got {}", i + 1, record.len()));
        }
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        match parsed {
            (Ok(t), Ok(w)) => atoms.push((t, w)),
            _ if i == 0 => continue,
            _ => return Err(format!("row {}: not a pair of numbers", i + 1)),
        }
    }
    TabulatedModel::new(atoms).map_err(|e| e.to_string())
}
