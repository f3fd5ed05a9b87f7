//! Binary path dump.
//!
//! Layout, all little-endian:
//! - magic `b"PFPATH\0\0"` (8 bytes), format version `u32`, field count `u32`
//!   (2 for (t, q), 3 for (t, q, p)), path count `u64`
//! - grid: `t_start` f64, `t_end` f64, `dt` f64, `n_steps` u64
//! - per path, `n_steps + 1` records of `field count` f64 values, row-major.

use std::io::{Read, Write};

use super::grid::TimeGrid;
use super::path::Path;
use crate::error::{Error, Result};

pub const MAGIC: [u8; 8] = *b"PFPATH\0\0";
pub const VERSION: u32 = 1;

pub fn write_paths<W: Write>(out: &mut W, paths: &[Path]) -> Result<()> {
    let first = paths.first().ok_or_else(|| Error::Config("no paths to dump".into()))?;
    let grid = first.grid;
    let fields: u32 = if first.p.is_some() { 3 } else { 2 };
    for p in paths {
        if p.grid != grid || (p.p.is_some() as u32 + 2) != fields {
            return Err(Error::Config("dumped paths must share grid and fields".into()));
        }
    }
    out.write_all(&MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&fields.to_le_bytes())?;
    out.write_all(&(paths.len() as u64).to_le_bytes())?;
    for v in [grid.t_start, grid.t_end, grid.dt] {
        out.write_all(&v.to_le_bytes())?;
    }
    out.write_all(&(grid.n_steps as u64).to_le_bytes())?;
    for path in paths {
        for i in 0..path.len() {
            out.write_all(&path.time(i).to_le_bytes())?;
            out.write_all(&path.q[i].to_le_bytes())?;
            if let Some(p) = &path.p {
                out.write_all(&p[i].to_le_bytes())?;
            }
        }
    }
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

pub fn read_paths<R: Read>(r: &mut R) -> Result<Vec<Path>> {
    if read_array::<8, _>(r)? != MAGIC {
        return Err(Error::Config("not a path dump".into()));
    }
    let version = u32::from_le_bytes(read_array(r)?);
    if version != VERSION {
        return Err(Error::Config(format!("unsupported dump version {version}")));
    }
    let fields = u32::from_le_bytes(read_array(r)?);
    let count = u64::from_le_bytes(read_array(r)?);
    let f = |r: &mut R| -> Result<f64> { Ok(f64::from_le_bytes(read_array(r)?)) };
    let (t_start, t_end, _dt) = (f(r)?, f(r)?, f(r)?);
    let n_steps = u64::from_le_bytes(read_array(r)?) as usize;
    let grid = TimeGrid::with_steps(t_start, t_end, n_steps)?;
    let mut paths = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let mut q = Vec::with_capacity(n_steps + 1);
        let mut p = (fields == 3).then(|| Vec::with_capacity(n_steps + 1));
        for _ in 0..=n_steps {
            let _t = f(r)?;
            q.push(f(r)?);
            if let Some(p) = p.as_mut() {
                p.push(f(r)?);
            }
        }
        paths.push(Path::new(grid, q, p));
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let grid = TimeGrid::with_steps(-1.0, 1.0, 4).unwrap();
        let a = Path::new(grid, vec![0.0, 1.0, 2.0, 3.0, 4.0], Some(vec![5.0; 5]));
        let b = Path::new(grid, vec![-1.0; 5], Some(vec![0.5; 5]));
        let mut buf = Vec::new();
        write_paths(&mut buf, &[a.clone(), b.clone()]).unwrap();
        assert_eq!(buf.len(), 8 + 4 + 4 + 8 + 24 + 8 + 2 * 5 * 3 * 8);
        let back = read_paths(&mut buf.as_slice()).unwrap();
        assert_eq!(back, vec![a, b]);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_paths(&mut &b"nonsense-bytes-here"[..]).is_err());
    }
}
