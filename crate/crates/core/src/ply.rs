//! PLY reading and writing for colored point clouds.
//!
//! Handles `ascii 1.0` and `binary_little_endian 1.0`. The vertex element must
//! carry `x`, `y`, `z` and `red`, `green`, `blue` (`uchar`); other vertex
//! properties and other elements are parsed and skipped.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::cloud::{Point, PointCloud};

#[derive(Debug, Error)]
pub enum PlyError {
    #[error("ply header line {line}: {message}: {text:?}")]
    Header { line: usize, text: String, message: String },
    #[error("unsupported ply: {0}")]
    Unsupported(String),
    #[error("ply body: {0}")]
    Body(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyEncoding {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
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
    fn parse(name: &str) -> Option<ScalarType> {
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

    fn size(self) -> usize {
        match self {
            ScalarType::I8 | ScalarType::U8 => 1,
            ScalarType::I16 | ScalarType::U16 => 2,
            ScalarType::I32 | ScalarType::U32 | ScalarType::F32 => 4,
            ScalarType::F64 => 8,
        }
    }

    fn decode_le(self, b: &[u8]) -> f64 {
        match self {
            ScalarType::I8 => b[0] as i8 as f64,
            ScalarType::U8 => b[0] as f64,
            ScalarType::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            ScalarType::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            ScalarType::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            ScalarType::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            ScalarType::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            ScalarType::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, ty: ScalarType },
    List { count: ScalarType, item: ScalarType },
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

#[derive(Debug)]
struct Header {
    encoding: PlyEncoding,
    elements: Vec<Element>,
}

/// Indices of the six required properties within the vertex element.
struct VertexLayout {
    position: [usize; 3],
    color: [usize; 3],
}

fn header_err(line: usize, text: &str, message: &str) -> PlyError {
    PlyError::Header { line, text: text.to_string(), message: message.to_string() }
}

fn read_header<R: BufRead>(reader: &mut R) -> Result<Header, PlyError> {
    let mut line_no = 0;
    let mut next_line = |reader: &mut R| -> Result<Option<String>, PlyError> {
        let mut buf = Vec::new();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            return Ok(None);
        }
        line_no += 1;
        let text = String::from_utf8_lossy(&buf).trim_end_matches(['\n', '\r']).to_string();
        Ok(Some(text))
    };

    match next_line(reader)? {
        Some(l) if l.trim() == "ply" => {}
        Some(l) => return Err(header_err(1, &l, "missing \"ply\" magic")),
        None => return Err(header_err(1, "", "empty file")),
    }

    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    let mut line = 1;
    loop {
        let text = next_line(reader)?
            .ok_or_else(|| header_err(line + 1, "", "unexpected end of file before end_header"))?;
        line += 1;
        let tokens: Vec<&str> = text.split_whitespace().collect();
        match tokens.first().copied() {
            None => continue,
            Some("comment") | Some("obj_info") => continue,
            Some("end_header") => break,
            Some("format") => {
                if tokens.len() != 3 {
                    return Err(header_err(line, &text, "malformed format line"));
                }
                if tokens[2] != "1.0" {
                    return Err(header_err(line, &text, "unknown format version"));
                }
                encoding = Some(match tokens[1] {
                    "ascii" => PlyEncoding::Ascii,
                    "binary_little_endian" => PlyEncoding::BinaryLittleEndian,
                    "binary_big_endian" => {
                        return Err(PlyError::Unsupported("binary_big_endian encoding".into()))
                    }
                    _ => return Err(header_err(line, &text, "unknown format")),
                });
            }
            Some("element") => {
                if tokens.len() != 3 {
                    return Err(header_err(line, &text, "malformed element line"));
                }
                let count = tokens[2]
                    .parse()
                    .map_err(|_| header_err(line, &text, "bad element count"))?;
                elements.push(Element { name: tokens[1].to_string(), count, properties: Vec::new() });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| header_err(line, &text, "property before any element"))?;
                let property = match tokens.as_slice() {
                    ["property", "list", count, item, _name] => {
                        let count = ScalarType::parse(count)
                            .ok_or_else(|| header_err(line, &text, "unknown list count type"))?;
                        let item = ScalarType::parse(item)
                            .ok_or_else(|| header_err(line, &text, "unknown list item type"))?;
                        Property::List { count, item }
                    }
                    ["property", ty, name] => {
                        let ty = ScalarType::parse(ty)
                            .ok_or_else(|| header_err(line, &text, "unknown property type"))?;
                        Property::Scalar { name: name.to_string(), ty }
                    }
                    _ => return Err(header_err(line, &text, "malformed property line")),
                };
                element.properties.push(property);
            }
            Some(_) => return Err(header_err(line, &text, "unrecognized header keyword")),
        }
    }

    let encoding = encoding.ok_or_else(|| header_err(2, "", "missing format line"))?;
    Ok(Header { encoding, elements })
}

fn vertex_layout(element: &Element) -> Result<VertexLayout, PlyError> {
    let find = |names: &[&str]| -> Option<(usize, ScalarType)> {
        element.properties.iter().enumerate().find_map(|(i, p)| match p {
            Property::Scalar { name, ty } if names.contains(&name.as_str()) => Some((i, *ty)),
            _ => None,
        })
    };
    let mut position = [0; 3];
    for (k, axis) in ["x", "y", "z"].iter().enumerate() {
        let (i, _) = find(&[axis]).ok_or_else(|| {
            PlyError::Unsupported(format!("vertex element has no {axis} property"))
        })?;
        position[k] = i;
    }
    let mut color = [0; 3];
    for (k, names) in [["red", "r"], ["green", "g"], ["blue", "b"]].iter().enumerate() {
        let (i, ty) = find(names).ok_or_else(|| {
            PlyError::Unsupported(format!("vertex element has no {} property", names[0]))
        })?;
        if ty != ScalarType::U8 {
            return Err(PlyError::Unsupported(format!("{} must be uchar", names[0])));
        }
        color[k] = i;
    }
    Ok(VertexLayout { position, color })
}

fn truncated(what: &str) -> PlyError {
    PlyError::Io(io::Error::new(io::ErrorKind::UnexpectedEof, format!("truncated ply body: {what}")))
}

/// Reads every value of one element instance in binary form.
fn read_binary_row<R: Read>(
    reader: &mut R,
    element: &Element,
    row: &mut Vec<f64>,
) -> Result<(), PlyError> {
    row.clear();
    let mut buf = [0u8; 8];
    for property in &element.properties {
        match *property {
            Property::Scalar { ty, .. } => {
                read_exact(reader, &mut buf[..ty.size()])?;
                row.push(ty.decode_le(&buf));
            }
            Property::List { count, item } => {
                read_exact(reader, &mut buf[..count.size()])?;
                let n = count.decode_le(&buf);
                if !(n >= 0.0) {
                    return Err(PlyError::Body(format!("negative list length in {}", element.name)));
                }
                let mut skip = vec![0u8; n as usize * item.size()];
                read_exact(reader, &mut skip)?;
                row.push(f64::NAN);
            }
        }
    }
    Ok(())
}

fn read_exact<R: Read>(reader: &mut R, buf: &mut [u8]) -> Result<(), PlyError> {
    reader.read_exact(buf).map_err(|e| {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            truncated("unexpected end of file")
        } else {
            PlyError::Io(e)
        }
    })
}

fn read_ascii_row<R: BufRead>(
    reader: &mut R,
    element: &Element,
    row: &mut Vec<f64>,
    line: &mut String,
) -> Result<(), PlyError> {
    row.clear();
    loop {
        line.clear();
        if reader.read_line(line)? == 0 {
            return Err(truncated(&format!("missing {} rows", element.name)));
        }
        if !line.trim().is_empty() {
            break;
        }
    }
    let mut tokens = line.split_whitespace();
    let mut next = || -> Result<f64, PlyError> {
        let t = tokens.next().ok_or_else(|| truncated(&format!("short {} row", element.name)))?;
        t.parse::<f64>()
            .map_err(|_| PlyError::Body(format!("bad number {t:?} in {} row", element.name)))
    };
    for property in &element.properties {
        match property {
            Property::Scalar { .. } => row.push(next()?),
            Property::List { .. } => {
                let n = next()?;
                if !(n >= 0.0) {
                    return Err(PlyError::Body(format!("negative list length in {}", element.name)));
                }
                for _ in 0..n as usize {
                    next()?;
                }
                row.push(f64::NAN);
            }
        }
    }
    Ok(())
}

fn point_from_row(row: &[f64], layout: &VertexLayout, index: usize) -> Result<Point, PlyError> {
    let position = layout.position.map(|i| row[i]);
    if position.iter().any(|c| !c.is_finite()) {
        return Err(PlyError::Body(format!("vertex {index} has a non-finite coordinate")));
    }
    let mut rgb = [0u8; 3];
    for (k, &i) in layout.color.iter().enumerate() {
        let v = row[i];
        if !(0.0..=255.0).contains(&v) || v.fract() != 0.0 {
            return Err(PlyError::Body(format!("vertex {index} has color {v} outside 0..=255")));
        }
        rgb[k] = v as u8;
    }
    Ok(Point { position, rgb })
}

pub fn read_ply<R: BufRead>(mut reader: R) -> Result<PointCloud, PlyError> {
    let header = read_header(&mut reader)?;
    let vertex_pos = header
        .elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| PlyError::Unsupported("no vertex element".into()))?;
    let layout = vertex_layout(&header.elements[vertex_pos])?;

    let mut points = Vec::new();
    let mut row = Vec::new();
    let mut line = String::new();
    // Elements after the vertex element are never needed.
    for element in &header.elements[..=vertex_pos] {
        let is_vertex = element.name == "vertex";
        if is_vertex {
            points.reserve(element.count);
        }
        for i in 0..element.count {
            match header.encoding {
                PlyEncoding::Ascii => read_ascii_row(&mut reader, element, &mut row, &mut line)?,
                PlyEncoding::BinaryLittleEndian => read_binary_row(&mut reader, element, &mut row)?,
            }
            if is_vertex {
                points.push(point_from_row(&row, &layout, i)?);
            }
        }
    }
    Ok(PointCloud::new(points))
}

pub fn load_ply(path: impl AsRef<Path>) -> Result<PointCloud, PlyError> {
    let file = File::open(path)?;
    read_ply(BufReader::new(file))
}

/// Writes `cloud` with `double` coordinates, so binary output reloads bit-exactly.
pub fn write_ply<W: Write>(
    cloud: &PointCloud,
    writer: W,
    encoding: PlyEncoding,
) -> Result<(), PlyError> {
    let mut w = BufWriter::new(writer);
    let format = match encoding {
        PlyEncoding::Ascii => "ascii",
        PlyEncoding::BinaryLittleEndian => "binary_little_endian",
    };
    write!(
        w,
        "ply\nformat {format} 1.0\nelement vertex {}\n\
         property double x\nproperty double y\nproperty double z\n\
         property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n",
        cloud.len()
    )?;
    for p in &cloud.points {
        match encoding {
            PlyEncoding::Ascii => {
                let [x, y, z] = p.position;
                let [r, g, b] = p.rgb;
                // `{:?}` on f64 prints the shortest string that parses back exactly.
                writeln!(w, "{x:?} {y:?} {z:?} {r} {g} {b}")?;
            }
            PlyEncoding::BinaryLittleEndian => {
                for c in p.position {
                    w.write_all(&c.to_le_bytes())?;
                }
                w.write_all(&p.rgb)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_ply(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<(), PlyError> {
    save_ply_with(cloud, path, PlyEncoding::BinaryLittleEndian)
}

pub fn save_ply_with(
    cloud: &PointCloud,
    path: impl AsRef<Path>,
    encoding: PlyEncoding,
) -> Result<(), PlyError> {
    write_ply(cloud, File::create(path)?, encoding)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &[u8]) -> Result<PointCloud, PlyError> {
        read_ply(io::Cursor::new(text.to_vec()))
    }

    #[test]
    fn ascii_three_vertices() {
        let text = b"ply\nformat ascii 1.0\ncomment made by hand\nelement vertex 3\n\
            property float x\nproperty float y\nproperty float z\n\
            property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n\
            0 0 0 255 0 0\n1.5 2 3 0 255 0\n-4 5 6.25 1 2 3\n";
        let cloud = parse(text).unwrap();
        assert_eq!(cloud.len(), 3);
        assert_eq!(cloud.points[0], Point { position: [0.0, 0.0, 0.0], rgb: [255, 0, 0] });
        assert_eq!(cloud.points[1], Point { position: [1.5, 2.0, 3.0], rgb: [0, 255, 0] });
        assert_eq!(cloud.points[2], Point { position: [-4.0, 5.0, 6.25], rgb: [1, 2, 3] });
    }

    #[test]
    fn empty_vertex_element() {
        let text = b"ply\nformat ascii 1.0\nelement vertex 0\nproperty float x\n\
            property float y\nproperty float z\nproperty uchar red\nproperty uchar green\n\
            property uchar blue\nend_header\n";
        assert!(parse(text).unwrap().is_empty());
    }

    #[test]
    fn extra_properties_and_faces_are_skipped() {
        let mut bytes = b"ply\nformat binary_little_endian 1.0\nelement vertex 2\n\
            property float x\nproperty float y\nproperty float z\nproperty float nx\n\
            property uchar red\nproperty uchar green\nproperty uchar blue\nproperty uchar alpha\n\
            element face 1\nproperty list uchar int vertex_indices\nend_header\n"
            .to_vec();
        for (i, pos) in [[1.0f32, 2.0, 3.0], [4.0, 5.0, 6.0]].iter().enumerate() {
            for c in pos {
                bytes.extend_from_slice(&c.to_le_bytes());
            }
            bytes.extend_from_slice(&0.5f32.to_le_bytes());
            bytes.extend_from_slice(&[10 * i as u8, 20, 30, 255]);
        }
        bytes.push(3);
        for i in [0i32, 1, 1] {
            bytes.extend_from_slice(&i.to_le_bytes());
        }
        let cloud = parse(&bytes).unwrap();
        assert_eq!(cloud.len(), 2);
        assert_eq!(cloud.points[1], Point { position: [4.0, 5.0, 6.0], rgb: [10, 20, 30] });
    }

    #[test]
    fn malformed_header_names_line() {
        let text = b"ply\nformat ascii 1.0\nelement vertex three\nend_header\n";
        match parse(text) {
            Err(PlyError::Header { line, text, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(text, "element vertex three");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse(b"plyx\n"), Err(PlyError::Header { line: 1, .. })));
    }

    #[test]
    fn missing_color_is_unsupported() {
        let text = b"ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\n\
            property float y\nproperty float z\nend_header\n1 2 3\n";
        assert!(matches!(parse(text), Err(PlyError::Unsupported(_))));
    }

    #[test]
    fn big_endian_is_unsupported() {
        let text = b"ply\nformat binary_big_endian 1.0\nelement vertex 0\nend_header\n";
        assert!(matches!(parse(text), Err(PlyError::Unsupported(_))));
    }

    #[test]
    fn truncated_body_is_io_error() {
        let cloud = PointCloud::from_positions(&[[1.0, 2.0, 3.0]; 4], [9, 9, 9]);
        let mut bytes = Vec::new();
        write_ply(&cloud, &mut bytes, PlyEncoding::BinaryLittleEndian).unwrap();
        bytes.truncate(bytes.len() - 5);
        assert!(matches!(parse(&bytes), Err(PlyError::Io(_))));

        let mut text = Vec::new();
        write_ply(&cloud, &mut text, PlyEncoding::Ascii).unwrap();
        let cut = text.len() - 10;
        assert!(matches!(parse(&text[..cut]), Err(PlyError::Io(_))));
    }

    #[test]
    fn single_red_point_file_round_trip() {
        let cloud = PointCloud::from_positions(&[[0.0, 0.0, 0.0]], [255, 0, 0]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.ply");
        save_ply(&cloud, &path).unwrap();
        assert_eq!(load_ply(&path).unwrap(), cloud);
        let empty = PointCloud::default();
        save_ply(&empty, &path).unwrap();
        assert_eq!(load_ply(&path).unwrap(), empty);
    }

    #[test]
    fn unwritable_path() {
        let r = save_ply(&PointCloud::default(), "/nonexistent-dir/x/y.ply");
        assert!(matches!(r, Err(PlyError::Io(_))));
    }

    fn arb_cloud() -> impl Strategy<Value = PointCloud> {
        let point = (
            prop::array::uniform3(prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL),
            any::<[u8; 3]>(),
        )
            .prop_map(|(position, rgb)| Point { position, rgb });
        prop::collection::vec(point, 0..200).prop_map(PointCloud::new)
    }

    proptest! {
        #[test]
        fn binary_round_trip(cloud in arb_cloud()) {
            let mut bytes = Vec::new();
            write_ply(&cloud, &mut bytes, PlyEncoding::BinaryLittleEndian).unwrap();
            prop_assert_eq!(parse(&bytes).unwrap(), cloud);
        }

        #[test]
        fn ascii_round_trip(cloud in arb_cloud()) {
            let mut bytes = Vec::new();
            write_ply(&cloud, &mut bytes, PlyEncoding::Ascii).unwrap();
            prop_assert_eq!(parse(&bytes).unwrap(), cloud);
        }
    }
}
