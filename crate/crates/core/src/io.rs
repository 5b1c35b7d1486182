//! Output writers: legacy VTK point data, raw little-endian binary with a
//! text header, and residual histories as CSV.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::grid::{ComponentInfo, Domain, FieldSet};
use crate::waveholtz::ResidualEntry;

/// Legacy ASCII VTK with one `STRUCTURED_POINTS` block per component
/// (components live on different staggered lattices).
pub fn vtk_string(domain: &Domain, infos: &[ComponentInfo], fields: &FieldSet, title: &str) -> String {
    let mut s = String::new();
    for (info, data) in infos.iter().zip(&fields.components) {
        let _ = writeln!(s, "# vtk DataFile Version 3.0");
        let _ = writeln!(s, "{title} {}", info.name);
        let _ = writeln!(s, "ASCII\nDATASET STRUCTURED_POINTS");
        let d = info.dims;
        let mut origin = [0.0; 3];
        let mut spacing = [1.0; 3];
        for a in 0..domain.dim() {
            spacing[a] = domain.spacing(a);
            origin[a] = domain.lower[a] + info.stagger[a] * spacing[a];
        }
        // VTK wants x fastest; our storage has the last axis fastest.
        let _ = writeln!(s, "DIMENSIONS {} {} {}", d[0], d[1], d[2]);
        let _ = writeln!(s, "ORIGIN {} {} {}", origin[0], origin[1], origin[2]);
        let _ = writeln!(s, "SPACING {} {} {}", spacing[0], spacing[1], spacing[2]);
        let _ = writeln!(s, "POINT_DATA {}", info.len());
        let _ = writeln!(s, "SCALARS {} double 1\nLOOKUP_TABLE default", info.name);
        for k in 0..d[2] {
            for j in 0..d[1] {
                for i in 0..d[0] {
                    let _ = writeln!(s, "{:.10e}", data[info.offset(i, j, k)]);
                }
            }
        }
    }
    s
}

pub fn write_vtk(path: &Path, domain: &Domain, infos: &[ComponentInfo], fields: &FieldSet, title: &str) -> Result<()> {
    fs::write(path, vtk_string(domain, infos, fields, title))?;
    Ok(())
}

/// `<path>.bin` holds the components back to back as little-endian f64;
/// `<path>.hdr` describes their names, shapes and offsets.
pub fn write_raw(path: &Path, domain: &Domain, infos: &[ComponentInfo], fields: &FieldSet) -> Result<()> {
    let mut hdr = String::new();
    let _ = writeln!(hdr, "format f64-le row-major (last index fastest)");
    let _ = writeln!(hdr, "lower {:?}", domain.lower);
    let _ = writeln!(hdr, "upper {:?}", domain.upper);
    let _ = writeln!(hdr, "cells {:?}", domain.cells);
    let mut bin = fs::File::create(path.with_extension("bin"))?;
    let mut offset = 0usize;
    for (info, data) in infos.iter().zip(&fields.components) {
        let _ = writeln!(
            hdr,
            "component {} dims {:?} stagger {:?} offset {}",
            info.name, info.dims, info.stagger, offset
        );
        let bytes: Vec<u8> = data.iter().flat_map(|v| v.to_le_bytes()).collect();
        bin.write_all(&bytes)?;
        offset += bytes.len();
    }
    fs::write(path.with_extension("hdr"), hdr)?;
    Ok(())
}

pub fn read_raw_component(path: &Path, offset: usize, len: usize) -> Result<Vec<f64>> {
    let bytes = fs::read(path.with_extension("bin"))?;
    let end = offset + 8 * len;
    if end > bytes.len() {
        return Err(crate::Error::Io(std::io::Error::new(
            std::io::ErrorKind::UnexpectedEof,
            "component extends past the end of the file",
        )));
    }
    Ok(bytes[offset..end]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub fn residual_csv(history: &[ResidualEntry]) -> String {
    let mut s = String::from("iteration,relative_residual,wave_solves,seconds\n");
    for e in history {
        let _ = writeln!(s, "{},{:.12e},{},{:.6}", e.iteration, e.relative_residual, e.wave_solves, e.seconds);
    }
    s
}
