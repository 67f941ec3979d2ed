//! XYZ text format: one "x y z" triple per whitespace-separated line.
//! Lines starting with '#' and blank lines are skipped; columns beyond the
//! third are ignored.

use super::IoError;
use crate::cloud::Point3;
use std::path::Path;

pub(super) fn parse(path: &Path, bytes: &[u8]) -> Result<Vec<Point3>, IoError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| IoError::parse(path, 1, "file is not valid UTF-8 text"))?;
    let mut points = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut words = trimmed.split_whitespace();
        let mut coords = [0.0f64; 3];
        for (axis, slot) in coords.iter_mut().enumerate() {
            let word = words.next().ok_or_else(|| {
                IoError::parse(path, line_no, format!("line has {axis} of 3 coordinates"))
            })?;
            *slot = word.parse().map_err(|_| {
                IoError::parse(path, line_no, format!("bad coordinate value: {word}"))
            })?;
        }
        points.push(Point3::new(coords[0], coords[1], coords[2]));
    }
    Ok(points)
}
