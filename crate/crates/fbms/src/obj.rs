//! ASCII OBJ: `v x y z` and 1-based `f i j k` lines only.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use fbms_core::{TriMesh, Vec3};

use crate::error::{CliError, Result};

/// Seventeen significant digits, so a read gives back the same bits.
pub fn write_obj<W: Write>(mut w: W, mesh: &TriMesh) -> io::Result<()> {
    writeln!(w, "# fbms {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(
        w,
        "# {} vertices, {} faces",
        mesh.vertex_count(),
        mesh.face_count()
    )?;
    for p in &mesh.vertices {
        writeln!(w, "v {:.16e} {:.16e} {:.16e}", p.x, p.y, p.z)?;
    }
    for f in &mesh.faces {
        writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    w.flush()
}

pub fn save_obj(path: &Path, mesh: &TriMesh) -> Result<()> {
    let file = fs::File::create(path).map_err(CliError::io(path))?;
    write_obj(BufWriter::new(file), mesh).map_err(CliError::io(path))
}

/// Parse OBJ text. Texture and normal indices (`f 1/2/3 ...`) are ignored,
/// negative indices count back from the last vertex, and polygons are fanned
/// into triangles. Every other record is skipped.
pub fn parse_obj(text: &str, path: &Path) -> Result<TriMesh> {
    let err = |line: usize, message: String| CliError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut it = raw.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it
                    .take(3)
                    .map(|s| {
                        s.parse::<f64>()
                            .map_err(|e| err(line, format!("bad coordinate {s:?}: {e}")))
                    })
                    .collect::<Result<_>>()?;
                if c.len() != 3 || c.iter().any(|x| !x.is_finite()) {
                    return Err(err(line, "vertex needs three finite coordinates".into()));
                }
                vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let idx: Vec<u32> = it
                    .map(|s| {
                        let head = s.split('/').next().unwrap_or(s);
                        let k: i64 = head
                            .parse()
                            .map_err(|e| err(line, format!("bad index {s:?}: {e}")))?;
                        let n = vertices.len() as i64;
                        let k = if k < 0 { n + k } else { k - 1 };
                        if k < 0 || k >= n {
                            return Err(err(line, format!("index {head} out of range")));
                        }
                        Ok(k as u32)
                    })
                    .collect::<Result<_>>()?;
                if idx.len() < 3 {
                    return Err(err(line, "face needs at least three vertices".into()));
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    Ok(TriMesh::new(vertices, faces)?)
}

pub fn load_obj(path: &Path) -> Result<TriMesh> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    parse_obj(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let mut m = TriMesh::polar_disc(17, 3).unwrap();
        for (i, p) in m.vertices.iter_mut().enumerate() {
            p.z = (i as f64 * 0.7).sin() * 1e-3 + 1.0 / 3.0;
        }
        let mut buf = Vec::new();
        write_obj(&mut buf, &m).unwrap();
        let back = parse_obj(std::str::from_utf8(&buf).unwrap(), Path::new("mem")).unwrap();
        assert_eq!(back.vertices, m.vertices);
        assert_eq!(back.faces, m.faces);
    }

    #[test]
    fn slashes_negatives_and_quads() {
        let text = "o q\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 -2//1 -1//1\n";
        let m = parse_obj(text, Path::new("mem")).unwrap();
        assert_eq!(m.faces, vec![[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn bad_lines_are_located() {
        let e = parse_obj("v 0 0 0\nv 1 0\n", Path::new("x.obj")).unwrap_err();
        assert!(matches!(e, CliError::Parse { line: 2, .. }), "{e}");
        let e = parse_obj("v 0 0 0\nf 1 2 3\n", Path::new("x.obj")).unwrap_err();
        assert!(matches!(e, CliError::Parse { line: 2, .. }), "{e}");
    }
}
