//! Minimal PLY reader: ASCII and binary_little_endian, element "vertex"
//! with x/y/z as float or double. Other elements and properties are
//! skipped.

use super::IoError;
use crate::cloud::Point3;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq)]
enum ScalarType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarType {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => ScalarType::I8,
            "uchar" | "uint8" => ScalarType::U8,
            "short" | "int16" => ScalarType::I16,
            "ushort" | "uint16" => ScalarType::U16,
            "int" | "int32" => ScalarType::I32,
            "uint" | "uint32" => ScalarType::U32,
            "float" | "float32" => ScalarType::F32,
            "double" | "float64" => ScalarType::F64,
            _ => return None,
        })
    }

    fn size(&self) -> usize {
        match self {
            ScalarType::I8 | ScalarType::U8 => 1,
            ScalarType::I16 | ScalarType::U16 => 2,
            ScalarType::I32 | ScalarType::U32 | ScalarType::F32 => 4,
            ScalarType::F64 => 8,
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { ty: ScalarType, name: String },
    List,
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Encoding {
    Ascii,
    BinaryLittleEndian,
}

pub(super) fn parse(path: &Path, bytes: &[u8]) -> Result<Vec<Point3>, IoError> {
    let (encoding, elements, header_lines, body_start) = parse_header(path, bytes)?;
    let vertex = elements
        .iter()
        .find(|e| e.name == "vertex")
        .ok_or_else(|| IoError::parse(path, header_lines, "no vertex element in header"))?;
    let coord_slots = coordinate_slots(path, header_lines, vertex)?;

    match encoding {
        Encoding::Ascii => parse_ascii(path, bytes, body_start, header_lines, &elements, coord_slots),
        Encoding::BinaryLittleEndian => {
            parse_binary(path, bytes, body_start, header_lines, &elements, coord_slots)
        }
    }
}

type HeaderInfo = (Encoding, Vec<Element>, usize, usize);

fn parse_header(path: &Path, bytes: &[u8]) -> Result<HeaderInfo, IoError> {
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    let mut line_no = 0usize;

    let mut lines = HeaderLines { bytes, pos: 0 };
    while let Some(raw) = lines.next() {
        line_no += 1;
        let line = std::str::from_utf8(raw)
            .map_err(|_| IoError::parse(path, line_no, "header is not valid UTF-8"))?
            .trim_end_matches('\r')
            .trim();
        if line_no == 1 {
            if line != "ply" {
                return Err(IoError::parse(path, 1, "missing 'ply' magic"));
            }
            continue;
        }
        let mut words = line.split_whitespace();
        match words.next() {
            Some("format") => {
                encoding = Some(match words.next() {
                    Some("ascii") => Encoding::Ascii,
                    Some("binary_little_endian") => Encoding::BinaryLittleEndian,
                    Some(other) => {
                        return Err(IoError::parse(
                            path,
                            line_no,
                            format!("unsupported format: {other}"),
                        ))
                    }
                    None => return Err(IoError::parse(path, line_no, "truncated format line")),
                });
            }
            Some("comment") | Some("obj_info") => {}
            Some("element") => {
                let name = words
                    .next()
                    .ok_or_else(|| IoError::parse(path, line_no, "element without a name"))?;
                let count: usize = words
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| IoError::parse(path, line_no, "element without a count"))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let element = elements.last_mut().ok_or_else(|| {
                    IoError::parse(path, line_no, "property before any element")
                })?;
                let first = words
                    .next()
                    .ok_or_else(|| IoError::parse(path, line_no, "truncated property line"))?;
                if first == "list" {
                    element.properties.push(Property::List);
                } else {
                    let ty = ScalarType::parse(first).ok_or_else(|| {
                        IoError::parse(path, line_no, format!("unknown property type: {first}"))
                    })?;
                    let name = words
                        .next()
                        .ok_or_else(|| IoError::parse(path, line_no, "property without a name"))?;
                    element.properties.push(Property::Scalar {
                        ty,
                        name: name.to_string(),
                    });
                }
            }
            Some("end_header") => {
                let encoding = encoding
                    .ok_or_else(|| IoError::parse(path, line_no, "no format line before end_header"))?;
                return Ok((encoding, elements, line_no, lines.pos));
            }
            Some(other) => {
                return Err(IoError::parse(
                    path,
                    line_no,
                    format!("unexpected header keyword: {other}"),
                ));
            }
            None => {}
        }
    }
    Err(IoError::parse(path, line_no, "header has no end_header"))
}

struct HeaderLines<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Iterator for HeaderLines<'a> {
    type Item = &'a [u8];

    fn next(&mut self) -> Option<&'a [u8]> {
        if self.pos >= self.bytes.len() {
            return None;
        }
        let start = self.pos;
        let end = self.bytes[start..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|i| start + i)
            .unwrap_or(self.bytes.len());
        self.pos = end + 1;
        Some(&self.bytes[start..end])
    }
}

/// Column indices and types for x, y, z within the vertex element.
fn coordinate_slots(
    path: &Path,
    line: usize,
    vertex: &Element,
) -> Result<[(usize, ScalarType); 3], IoError> {
    let mut slots = [None; 3];
    for (idx, property) in vertex.properties.iter().enumerate() {
        if let Property::Scalar { ty, name } = property {
            let target = match name.as_str() {
                "x" => 0,
                "y" => 1,
                "z" => 2,
                _ => continue,
            };
            if !matches!(ty, ScalarType::F32 | ScalarType::F64) {
                return Err(IoError::parse(
                    path,
                    line,
                    format!("vertex property {name} must be float or double"),
                ));
            }
            slots[target] = Some((idx, *ty));
        }
    }
    match slots {
        [Some(x), Some(y), Some(z)] => Ok([x, y, z]),
        _ => Err(IoError::parse(path, line, "vertex element lacks x, y, z")),
    }
}

fn parse_ascii(
    path: &Path,
    bytes: &[u8],
    body_start: usize,
    header_lines: usize,
    elements: &[Element],
    coord_slots: [(usize, ScalarType); 3],
) -> Result<Vec<Point3>, IoError> {
    let body = std::str::from_utf8(&bytes[body_start..])
        .map_err(|_| IoError::parse(path, header_lines + 1, "ASCII body is not valid UTF-8"))?;
    let mut lines = body.lines();
    let mut line_no = header_lines;
    let mut points = Vec::new();
    for element in elements {
        for row in 0..element.count {
            let line = loop {
                line_no += 1;
                match lines.next() {
                    Some(l) if l.trim().is_empty() => continue,
                    Some(l) => break l,
                    None => {
                        return Err(IoError::parse(
                            path,
                            line_no,
                            format!("unexpected end of file in element {} row {row}", element.name),
                        ))
                    }
                }
            };
            if element.name != "vertex" {
                continue;
            }
            let columns: Vec<&str> = line.split_whitespace().collect();
            let mut coords = [0.0f64; 3];
            for (axis, (slot, _)) in coord_slots.iter().enumerate() {
                let text = columns.get(*slot).ok_or_else(|| {
                    IoError::parse(path, line_no, format!("vertex row has {} columns, needs more", columns.len()))
                })?;
                coords[axis] = text.parse().map_err(|_| {
                    IoError::parse(path, line_no, format!("bad coordinate value: {text}"))
                })?;
            }
            points.push(Point3::new(coords[0], coords[1], coords[2]));
        }
    }
    Ok(points)
}

fn parse_binary(
    path: &Path,
    bytes: &[u8],
    body_start: usize,
    header_lines: usize,
    elements: &[Element],
    coord_slots: [(usize, ScalarType); 3],
) -> Result<Vec<Point3>, IoError> {
    let mut offset = body_start;
    let mut points = Vec::new();
    for element in elements {
        // Fixed row size requires scalar-only properties.
        let mut row_size = 0usize;
        let mut field_offsets = Vec::with_capacity(element.properties.len());
        for property in &element.properties {
            match property {
                Property::Scalar { ty, .. } => {
                    field_offsets.push(row_size);
                    row_size += ty.size();
                }
                Property::List => {
                    if element.name == "vertex" || points.is_empty() {
                        return Err(IoError::parse(
                            path,
                            header_lines,
                            format!(
                                "binary element {} has a list property and cannot be skipped",
                                element.name
                            ),
                        ));
                    }
                    // List elements after the vertex data are irrelevant.
                    return Ok(points);
                }
            }
        }
        let needed = element.count * row_size;
        if bytes.len() < offset + needed {
            return Err(IoError::parse(
                path,
                header_lines,
                format!("binary body truncated in element {}", element.name),
            ));
        }
        if element.name == "vertex" {
            for row in 0..element.count {
                let base = offset + row * row_size;
                let mut coords = [0.0f64; 3];
                for (axis, (slot, ty)) in coord_slots.iter().enumerate() {
                    let at = base + field_offsets[*slot];
                    coords[axis] = match ty {
                        ScalarType::F32 => f32::from_le_bytes(
                            bytes[at..at + 4].try_into().expect("bounds checked"),
                        ) as f64,
                        ScalarType::F64 => f64::from_le_bytes(
                            bytes[at..at + 8].try_into().expect("bounds checked"),
                        ),
                        _ => unreachable!("coordinate_slots enforces float types"),
                    };
                }
                points.push(Point3::new(coords[0], coords[1], coords[2]));
            }
        }
        offset += needed;
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::super::{load_cloud, CloudFormat, IoError};
    use std::io::Write;

    fn write_temp(name: &str, bytes: &[u8]) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(bytes).unwrap();
        (dir, path)
    }

    #[test]
    fn ascii_three_vertices_in_order() {
        let text = "ply\nformat ascii 1.0\ncomment test\nelement vertex 3\n\
                    property float x\nproperty float y\nproperty float z\n\
                    end_header\n0 0 0\n1 0 0\n0 1 0\n";
        let (_d, path) = write_temp("a.ply", text.as_bytes());
        let cloud = load_cloud(&path, CloudFormat::Ply).unwrap();
        assert_eq!(cloud.len(), 3);
        assert_eq!(cloud.point(1).x, 1.0);
        assert_eq!(cloud.point(2).y, 1.0);
    }

    #[test]
    fn ascii_extra_properties_are_ignored() {
        let text = "ply\nformat ascii 1.0\nelement vertex 2\n\
                    property uchar red\nproperty float x\nproperty float y\nproperty float z\n\
                    end_header\n255 0 0 0\n128 1 2 3\n";
        let (_d, path) = write_temp("b.ply", text.as_bytes());
        let cloud = load_cloud(&path, CloudFormat::Ply).unwrap();
        assert_eq!(cloud.point(1).x, 1.0);
        assert_eq!(cloud.point(1).z, 3.0);
    }

    #[test]
    fn binary_little_endian_floats() {
        let mut bytes = b"ply\nformat binary_little_endian 1.0\nelement vertex 2\n\
                          property float x\nproperty float y\nproperty float z\nend_header\n"
            .to_vec();
        for v in [0.5f32, 1.5, 2.5, -1.0, -2.0, -3.0] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let (_d, path) = write_temp("c.ply", &bytes);
        let cloud = load_cloud(&path, CloudFormat::Ply).unwrap();
        assert_eq!(cloud.len(), 2);
        assert_eq!(cloud.point(0).y, 1.5);
        assert_eq!(cloud.point(1).z, -3.0);
    }

    #[test]
    fn binary_skips_trailing_scalar_element() {
        let mut bytes = b"ply\nformat binary_little_endian 1.0\nelement vertex 1\n\
                          property double x\nproperty double y\nproperty double z\n\
                          element extra 2\nproperty float value\nend_header\n"
            .to_vec();
        for v in [1.0f64, 2.0, 3.0] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        bytes.extend_from_slice(&7.0f32.to_le_bytes());
        bytes.extend_from_slice(&8.0f32.to_le_bytes());
        let (_d, path) = write_temp("d.ply", &bytes);
        let cloud = load_cloud(&path, CloudFormat::Ply).unwrap();
        assert_eq!(cloud.len(), 1);
        assert_eq!(cloud.point(0).z, 3.0);
    }

    #[test]
    fn malformed_row_reports_line_number() {
        let text = "ply\nformat ascii 1.0\nelement vertex 2\n\
                    property float x\nproperty float y\nproperty float z\n\
                    end_header\n0 0 0\n1 oops 0\n";
        let (_d, path) = write_temp("e.ply", text.as_bytes());
        match load_cloud(&path, CloudFormat::Ply).unwrap_err() {
            IoError::Parse { line, message, .. } => {
                assert_eq!(line, 9);
                assert!(message.contains("oops"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn missing_magic_reports_first_line() {
        let (_d, path) = write_temp("f.ply", b"plz\nformat ascii 1.0\nend_header\n");
        match load_cloud(&path, CloudFormat::Ply).unwrap_err() {
            IoError::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_vertex_element_is_empty_cloud() {
        let text = "ply\nformat ascii 1.0\nelement vertex 0\n\
                    property float x\nproperty float y\nproperty float z\nend_header\n";
        let (_d, path) = write_temp("g.ply", text.as_bytes());
        assert!(matches!(
            load_cloud(&path, CloudFormat::Ply).unwrap_err(),
            IoError::EmptyCloud { .. }
        ));
    }
}
