//! Flat little-endian field files.
//!
//! ```text
//! u32  n
//! f64  L
//! u32  representation   0 = physical, 1 = Fourier
//! u32  components       4
//! then, component by component, n³ pairs (f32 re, f32 im), z fastest
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::{BoxGrid, Representation, SpinorField};
use crate::error::{Error, Result};

pub const HEADER_BYTES: usize = 4 + 8 + 4 + 4;

pub fn write_field<W: Write>(mut w: W, psi: &SpinorField) -> Result<()> {
    let grid = psi.grid();
    if grid.has_carrier() {
        return Err(Error::Format("carrier-frame fields have no flat layout".into()));
    }
    w.write_all(&(grid.n() as u32).to_le_bytes())?;
    w.write_all(&grid.length().to_le_bytes())?;
    w.write_all(&psi.representation().code().to_le_bytes())?;
    w.write_all(&4u32.to_le_bytes())?;
    for c in psi.components() {
        for z in c {
            w.write_all(&(z.re as f32).to_le_bytes())?;
            w.write_all(&(z.im as f32).to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format("truncated field file".into()),
        _ => Error::Io(e),
    })?;
    Ok(b)
}

pub fn read_field<R: Read>(mut r: R) -> Result<SpinorField> {
    let n = u32::from_le_bytes(read_array(&mut r)?) as usize;
    let length = f64::from_le_bytes(read_array(&mut r)?);
    let code = u32::from_le_bytes(read_array(&mut r)?);
    let count = u32::from_le_bytes(read_array(&mut r)?);
    let repr = Representation::from_code(code)
        .ok_or_else(|| Error::Format(format!("unknown representation flag {code}")))?;
    if count != 4 {
        return Err(Error::Format(format!("expected 4 components, found {count}")));
    }
    let grid = BoxGrid::new(n, length).map_err(|e| Error::Format(e.to_string()))?;
    let mut comps: [Vec<Complex64>; 4] = Default::default();
    for c in comps.iter_mut() {
        c.reserve_exact(grid.len());
        for _ in 0..grid.len() {
            let re = f32::from_le_bytes(read_array(&mut r)?);
            let im = f32::from_le_bytes(read_array(&mut r)?);
            c.push(Complex64::new(re as f64, im as f64));
        }
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after field body".into()));
    }
    Ok(SpinorField::from_components(grid, repr, comps))
}

pub fn save_field(path: &Path, psi: &SpinorField) -> Result<()> {
    write_field(BufWriter::new(File::create(path)?), psi)
}

pub fn load_field(path: &Path) -> Result<SpinorField> {
    read_field(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn round_trip_is_f32_exact() {
        let g = make_grid(8, 2.5).unwrap();
        let f = SpinorField::from_fn(g, |x| {
            [0, 1, 2, 3].map(|a| Complex64::new((x[0] + a as f64).sin(), x[1] * x[2] - a as f64))
        });
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        assert_eq!(buf.len(), HEADER_BYTES + 4 * 512 * 8);
        assert_eq!(&buf[0..4], &8u32.to_le_bytes());
        let back = read_field(buf.as_slice()).unwrap();
        assert_eq!(back.grid(), f.grid());
        for a in 0..4 {
            for (p, q) in back.component(a).iter().zip(f.component(a)) {
                assert_eq!(p.re, q.re as f32 as f64);
                assert_eq!(p.im, q.im as f32 as f64);
            }
        }
        assert!(read_field(&buf[..buf.len() - 1]).is_err());
        buf.push(0);
        assert!(read_field(buf.as_slice()).is_err());
    }

    #[test]
    fn rejects_carrier_grids() {
        let g = BoxGrid::with_carrier(8, 1.0, [0.0, 0.0, 10.0]).unwrap();
        let f = SpinorField::zeros(g, Representation::Physical);
        assert!(write_field(Vec::new(), &f).is_err());
    }
}
