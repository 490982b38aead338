//! Reads back the trajectory CSV written by `simulate`.

use std::path::Path;

use saari_core::field::VectorField;
use saari_core::flow::Trajectory;

use crate::CliError;

/// Parses the time column and the first `field.dim()` state columns; the
/// monitor columns are recomputed from the states.
pub fn read_trajectory(path: &Path, field: &dyn VectorField) -> Result<Trajectory, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_trajectory(&text, field).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn parse_trajectory(text: &str, field: &dyn VectorField) -> Result<Trajectory, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or("empty file")?.split(',').collect();
    let dim = field.dim();
    if header.first() != Some(&"t") || header.len() < dim + 1 {
        return Err(format!(
            "expected a header `t` followed by at least {dim} state columns"
        ));
    }
    let (mut times, mut states) = (Vec::new(), Vec::new());
    for (row, line) in lines.enumerate() {
        let values = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("row {}: {e}", row + 1))?;
        if values.len() != header.len() {
            return Err(format!(
                "row {} has {} columns, header has {}",
                row + 1,
                values.len(),
                header.len()
            ));
        }
        times.push(values[0]);
        states.push(values[1..=dim].to_vec());
    }
    Trajectory::from_states(field, times, states).map_err(|e| e.to_string())
}
