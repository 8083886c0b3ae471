//! Field files.
//!
//! Binary layout, all little-endian f64: `d, N, grading, outer`, then the
//! N nodes, then N interleaved `re, im` pairs. Grading codes: 0 geometric,
//! 1 uniform; outer codes: 0 exterior, 1 dirichlet. Reading rebuilds the grid
//! from (d, r_min, r_max, N, grading, outer) and checks the stored nodes.

use hartree::{Grading, GridSpec, HartreeError, OuterBoundary, RadialField, RadialGrid, Result};
use num_complex::Complex64;
use std::path::Path;
use std::sync::Arc;

const HEADER: usize = 4;

fn bad(msg: impl Into<String>) -> HartreeError {
    HartreeError::BadFieldFile(msg.into())
}

pub fn encode_field(u: &RadialField) -> Vec<u8> {
    let g = u.grid();
    let spec = g.spec();
    let mut vals = vec![
        spec.d as f64,
        g.len() as f64,
        match spec.grading {
            Grading::Geometric => 0.0,
            Grading::Uniform => 1.0,
        },
        match spec.outer {
            OuterBoundary::Exterior => 0.0,
            OuterBoundary::Dirichlet => 1.0,
        },
    ];
    vals.extend_from_slice(g.nodes());
    for z in u.values() {
        vals.push(z.re);
        vals.push(z.im);
    }
    vals.iter().flat_map(|x| x.to_le_bytes()).collect()
}

fn code(x: f64, what: &str) -> Result<usize> {
    if x >= 0.0 && x.fract() == 0.0 && x < 1e9 {
        Ok(x as usize)
    } else {
        Err(bad(format!("{what} = {x}")))
    }
}

/// Decode against an existing grid when given (shared `Arc`), else build one.
pub fn decode_field(bytes: &[u8], grid: Option<&Arc<RadialGrid>>) -> Result<RadialField> {
    if bytes.len() % 8 != 0 || bytes.len() < 8 * HEADER {
        return Err(bad(format!("{} bytes is not a field file", bytes.len())));
    }
    let vals: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let d = code(vals[0], "d")?;
    let n = code(vals[1], "N")?;
    if vals.len() != HEADER + 3 * n {
        return Err(bad(format!("length {} does not match N = {n}", vals.len())));
    }
    let grading = match code(vals[2], "grading")? {
        0 => Grading::Geometric,
        1 => Grading::Uniform,
        c => return Err(bad(format!("grading code {c}"))),
    };
    let outer = match code(vals[3], "outer")? {
        0 => OuterBoundary::Exterior,
        1 => OuterBoundary::Dirichlet,
        c => return Err(bad(format!("outer code {c}"))),
    };
    let nodes = &vals[HEADER..HEADER + n];
    let spec = GridSpec { d, r_min: nodes[0], r_max: nodes[n - 1], n, grading, outer };
    let grid = match grid {
        Some(g) if *g.spec() == spec => g.clone(),
        Some(_) => return Err(HartreeError::GridMismatch),
        None => Arc::new(spec.build()?),
    };
    for (a, b) in grid.nodes().iter().zip(nodes) {
        if (a - b).abs() > 1e-12 * a.abs() {
            return Err(bad("stored nodes differ from the rebuilt grid"));
        }
    }
    let values = vals[HEADER + n..].chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
    RadialField::new(grid, values)
}

pub fn write_field(path: &Path, u: &RadialField) -> Result<()> {
    std::fs::write(path, encode_field(u))?;
    Ok(())
}

pub fn read_field(path: &Path, grid: Option<&Arc<RadialGrid>>) -> Result<RadialField> {
    decode_field(&std::fs::read(path)?, grid)
}

/// `r,re,im` rows for plotting.
pub fn field_csv(u: &RadialField) -> String {
    let mut s = String::from("r,re,im\n");
    for (r, z) in u.grid().nodes().iter().zip(u.values()) {
        s.push_str(&format!("{r:.17e},{:.17e},{:.17e}\n", z.re, z.im));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_file_is_rejected() {
        let g = Arc::new(GridSpec::default().with_n(32).build().unwrap());
        let u = RadialField::from_real_fn(g, |r| (-r * r).exp());
        let b = encode_field(&u);
        assert!(matches!(decode_field(&b[..b.len() - 8], None), Err(HartreeError::BadFieldFile(_))));
        assert!(decode_field(&[0u8; 12], None).is_err());
    }
}
