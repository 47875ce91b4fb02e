//! Binary snapshot format.
//!
//! Little-endian throughout:
//!
//! | bytes | content                      |
//! |-------|------------------------------|
//! | 4     | magic `LUFS`                 |
//! | 4     | version (`u32`, currently 1) |
//! | 4     | `n_modes` (`u32`)            |
//! | 4     | `n_components` (`u32`)       |
//!
//! followed by `n_modes² · n_components` complex values, each stored as
//! `re: f64, im: f64`. Coefficients are written in row-major FFT order over
//! `(i, j)` and the components of one wavenumber are interleaved.

use std::io::{Read, Write};

use ndarray::Array2;
use num_complex::Complex64;

use super::field::{SpectralScalar, SpectralVelocity};
use super::grid::TorusGrid;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"LUFS";
pub const VERSION: u32 = 1;

/// Raw snapshot contents.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub n_modes: usize,
    pub components: Vec<Array2<Complex64>>,
}

impl Snapshot {
    pub fn from_velocity(v: &SpectralVelocity) -> Self {
        Self {
            n_modes: v.grid().n_modes(),
            components: v.comps().to_vec(),
        }
    }

    pub fn from_scalar(q: &SpectralScalar) -> Self {
        Self {
            n_modes: q.grid().n_modes(),
            components: vec![q.coeffs().clone()],
        }
    }

    pub fn into_velocity(self, grid: &TorusGrid) -> Result<SpectralVelocity> {
        self.check_grid(grid, 2)?;
        let mut it = self.components.into_iter();
        let u = it.next().expect("two components");
        let v = it.next().expect("two components");
        SpectralVelocity::from_coeffs(grid, u, v)
    }

    pub fn into_scalar(self, grid: &TorusGrid) -> Result<SpectralScalar> {
        self.check_grid(grid, 1)?;
        let q = self.components.into_iter().next().expect("one component");
        SpectralScalar::from_coeffs(grid, q)
    }

    fn check_grid(&self, grid: &TorusGrid, comps: usize) -> Result<()> {
        if self.n_modes != grid.n_modes() {
            return Err(Error::ShapeMismatch {
                expected: grid.n_modes(),
                found: self.n_modes,
            });
        }
        if self.components.len() != comps {
            return Err(Error::Snapshot(format!(
                "expected {comps} components, found {}",
                self.components.len()
            )));
        }
        Ok(())
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.n_modes as u32).to_le_bytes())?;
        w.write_all(&(self.components.len() as u32).to_le_bytes())?;
        let n = self.n_modes;
        let mut buf = Vec::with_capacity(n * n * self.components.len() * 16);
        for i in 0..n {
            for j in 0..n {
                for comp in &self.components {
                    let c = comp[[i, j]];
                    buf.extend_from_slice(&c.re.to_le_bytes());
                    buf.extend_from_slice(&c.im.to_le_bytes());
                }
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)
            .map_err(|_| Error::Snapshot("truncated header".into()))?;
        if &header[0..4] != MAGIC {
            return Err(Error::Snapshot("bad magic".into()));
        }
        let word = |k: usize| u32::from_le_bytes(header[k..k + 4].try_into().expect("4 bytes"));
        let version = word(4);
        if version != VERSION {
            return Err(Error::Snapshot(format!("unsupported version {version}")));
        }
        let n = word(8) as usize;
        let n_comps = word(12) as usize;
        if n < 8 || n % 2 != 0 || n > 1 << 14 {
            return Err(Error::Snapshot(format!("invalid n_modes {n}")));
        }
        if n_comps == 0 || n_comps > 3 {
            return Err(Error::Snapshot(format!("invalid n_components {n_comps}")));
        }
        let mut body = vec![0u8; n * n * n_comps * 16];
        r.read_exact(&mut body)
            .map_err(|_| Error::Snapshot("truncated coefficient block".into()))?;
        let mut components = vec![Array2::<Complex64>::zeros((n, n)); n_comps];
        let f = |k: usize| f64::from_le_bytes(body[k..k + 8].try_into().expect("8 bytes"));
        let mut offset = 0;
        for i in 0..n {
            for j in 0..n {
                for comp in components.iter_mut() {
                    comp[[i, j]] = Complex64::new(f(offset), f(offset + 8));
                    offset += 16;
                }
            }
        }
        Ok(Self {
            n_modes: n,
            components,
        })
    }
}

pub fn save_velocity(path: &std::path::Path, v: &SpectralVelocity) -> Result<()> {
    let file = std::fs::File::create(path)?;
    Snapshot::from_velocity(v).write(std::io::BufWriter::new(file))
}

pub fn load_velocity(path: &std::path::Path, grid: &TorusGrid) -> Result<SpectralVelocity> {
    let file = std::fs::File::open(path)?;
    Snapshot::read(std::io::BufReader::new(file))?.into_velocity(grid)
}
