//! ASCII OFF reader/writer.
//!
//! Dialect: a header line `OFF`, a counts line `V E F`, then V position
//! lines of 3 floats and F face lines `3 i j k`. The writer emits 17
//! significant digits so coordinates round-trip bit-exactly; edge lengths
//! are always recomputed from positions on load. The middle count is
//! echoed but not trusted.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use thiserror::Error;

use crate::mesh::{MeshError, TriangleMesh};

#[derive(Debug, Error)]
pub enum OffError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("non-triangular face at line {line}: {vertices} vertices")]
    NonTriangularFace { line: usize, vertices: usize },
    #[error("invalid mesh: {0}")]
    Mesh(#[from] MeshError),
}

fn parse_err(line: usize, message: impl Into<String>) -> OffError {
    OffError::Parse {
        line,
        message: message.into(),
    }
}

/// Load a triangular OFF file. The mesh is fully validated; boundary or
/// non-manifold inputs surface as `OffError::Mesh`.
pub fn load_off(path: impl AsRef<Path>) -> Result<TriangleMesh, OffError> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut lines = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.split('#').next().unwrap_or("").trim().to_string();
        if !trimmed.is_empty() {
            lines.push((idx + 1, trimmed));
        }
    }
    let mut it = lines.into_iter();
    let (lno, header) = it.next().ok_or_else(|| parse_err(0, "empty file"))?;
    if header != "OFF" {
        return Err(parse_err(lno, format!("expected OFF header, got '{header}'")));
    }
    let (lno, counts) = it
        .next()
        .ok_or_else(|| parse_err(lno, "missing counts line"))?;
    let parts: Vec<&str> = counts.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(parse_err(lno, "counts line must hold three integers"));
    }
    let nums: Result<Vec<usize>, _> = parts.iter().map(|s| s.parse::<usize>()).collect();
    let nums = nums.map_err(|e| parse_err(lno, format!("bad count: {e}")))?;
    let (n_vertices, _n_edges, n_faces) = (nums[0], nums[1], nums[2]);

    let mut positions = Vec::with_capacity(n_vertices);
    for _ in 0..n_vertices {
        let (lno, line) = it
            .next()
            .ok_or_else(|| parse_err(0, "unexpected end of file in vertex block"))?;
        let coords: Vec<&str> = line.split_whitespace().collect();
        if coords.len() != 3 {
            return Err(parse_err(lno, "vertex line must hold three floats"));
        }
        let mut p = [0.0; 3];
        for (k, c) in coords.iter().enumerate() {
            p[k] = c
                .parse::<f64>()
                .map_err(|e| parse_err(lno, format!("bad coordinate: {e}")))?;
        }
        positions.push(p);
    }
    let mut faces = Vec::with_capacity(n_faces);
    for _ in 0..n_faces {
        let (lno, line) = it
            .next()
            .ok_or_else(|| parse_err(0, "unexpected end of file in face block"))?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.is_empty() {
            return Err(parse_err(lno, "empty face line"));
        }
        let arity: usize = parts[0]
            .parse()
            .map_err(|e| parse_err(lno, format!("bad face arity: {e}")))?;
        if arity != 3 {
            return Err(OffError::NonTriangularFace {
                line: lno,
                vertices: arity,
            });
        }
        if parts.len() != 4 {
            return Err(parse_err(lno, "triangular face line must hold 3 indices"));
        }
        let mut face = [0usize; 3];
        for k in 0..3 {
            face[k] = parts[k + 1]
                .parse()
                .map_err(|e| parse_err(lno, format!("bad vertex index: {e}")))?;
        }
        faces.push(face);
    }
    Ok(TriangleMesh::from_positions(positions, faces)?)
}

/// Write a mesh with positions as OFF. 17 significant digits per coordinate.
pub fn save_off(mesh: &TriangleMesh, path: impl AsRef<Path>) -> Result<(), OffError> {
    let positions = mesh.positions.as_ref().ok_or(OffError::Parse {
        line: 0,
        message: "mesh carries no embedding; nothing to write".into(),
    })?;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "OFF")?;
    writeln!(
        out,
        "{} {} {}",
        mesh.vertex_count(),
        mesh.edge_count(),
        mesh.faces().len()
    )?;
    for p in positions {
        writeln!(out, "{:.16e} {:.16e} {:.16e}", p[0], p[1], p[2])?;
    }
    for face in mesh.faces() {
        writeln!(out, "3 {} {} {}", face[0], face[1], face[2])?;
    }
    out.flush()?;
    Ok(())
}
