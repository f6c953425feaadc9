//! NTDF trajectory file format.
//!
//! Little-endian layout:
//!   magic "NTDF" (4 bytes), u32 version = 1, u32 d, u32 N, u32 L,
//!   u32 n_L, f64 dt, u64 M,
//!   N*d f64 node coordinates (node-major),
//!   N u64 permutation entries,
//!   M sequences of (n_L+1)*N*L f64 values (time-major, component-major
//!   within a state).
//!
//! The round trip is bit-exact. A JSON sidecar `<path>.meta.json` carries
//! the non-normative metadata (PDE name, sampler seed, oracle sub-steps).

use crate::error::{Error, Result};
use crate::grid::{Domain, DatasetMeta, GridSet, NodalState, TrajectoryDataset, TrajectorySequence};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const NTDF_MAGIC: &[u8; 4] = b"NTDF";
pub const NTDF_VERSION: u32 = 1;

struct Reader<R: Read> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn exact(&mut self, buf: &mut [u8], context: &'static str) -> Result<()> {
        self.inner
            .read_exact(buf)
            .map_err(|_| Error::Truncated { context })
    }

    fn u32(&mut self, context: &'static str) -> Result<u32> {
        let mut b = [0u8; 4];
        self.exact(&mut b, context)?;
        Ok(u32::from_le_bytes(b))
    }

    fn u64(&mut self, context: &'static str) -> Result<u64> {
        let mut b = [0u8; 8];
        self.exact(&mut b, context)?;
        Ok(u64::from_le_bytes(b))
    }

    fn f64(&mut self, context: &'static str) -> Result<f64> {
        let mut b = [0u8; 8];
        self.exact(&mut b, context)?;
        Ok(f64::from_le_bytes(b))
    }

    fn f64_vec(&mut self, count: usize, context: &'static str) -> Result<Vec<f64>> {
        let mut bytes = vec![0u8; count * 8];
        self.exact(&mut bytes, context)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

/// Serialize a dataset into NTDF bytes.
pub fn dataset_to_bytes(dataset: &TrajectoryDataset) -> Vec<u8> {
    let grid = dataset.grid();
    let (d, n) = (grid.dim(), grid.len());
    let l = dataset.components();
    let n_l = dataset.n_l();
    let m = dataset.len();

    let mut out = Vec::with_capacity(48 + n * d * 8 + n * 8 + m * (n_l + 1) * n * l * 8);
    out.extend_from_slice(NTDF_MAGIC);
    out.extend_from_slice(&NTDF_VERSION.to_le_bytes());
    out.extend_from_slice(&(d as u32).to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(l as u32).to_le_bytes());
    out.extend_from_slice(&(n_l as u32).to_le_bytes());
    out.extend_from_slice(&dataset.dt().to_le_bytes());
    out.extend_from_slice(&(m as u64).to_le_bytes());
    for &c in grid.coords() {
        out.extend_from_slice(&c.to_le_bytes());
    }
    for &p in grid.permutation() {
        out.extend_from_slice(&(p as u64).to_le_bytes());
    }
    for seq in dataset.sequences() {
        for state in seq.states() {
            for &v in state.values() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    out
}

/// Parse NTDF bytes back into a dataset. `meta` is attached as-is.
pub fn dataset_from_reader(reader: impl Read, meta: DatasetMeta) -> Result<TrajectoryDataset> {
    let mut r = Reader { inner: reader };

    let mut magic = [0u8; 4];
    r.exact(&mut magic, "magic")?;
    if &magic != NTDF_MAGIC {
        return Err(Error::BadMagic { expected: "NTDF" });
    }
    let version = r.u32("version")?;
    if version != NTDF_VERSION {
        return Err(Error::UnsupportedVersion { found: version });
    }
    let d = r.u32("dim")? as usize;
    let n = r.u32("node count")? as usize;
    let l = r.u32("component count")? as usize;
    let n_l = r.u32("n_L")? as usize;
    let dt = r.f64("dt")?;
    let m = r.u64("sequence count")? as usize;

    let coords = r.f64_vec(n * d, "node coordinates")?;
    let mut permutation = Vec::with_capacity(n);
    for _ in 0..n {
        permutation.push(r.u64("permutation")? as usize);
    }
    let domain = if d == 1 {
        Domain::Periodic1D {
            length: 2.0 * std::f64::consts::PI,
        }
    } else {
        Domain::Box2D
    };
    let grid = GridSet::new(d, coords, permutation, domain)?;

    let mut sequences = Vec::with_capacity(m);
    for _ in 0..m {
        let mut states = Vec::with_capacity(n_l + 1);
        for k in 0..=n_l {
            let values = r.f64_vec(n * l, "state values")?;
            states.push(NodalState::new(values, k as f64 * dt, n, l)?);
        }
        sequences.push(TrajectorySequence::new(states, dt)?);
    }
    TrajectoryDataset::new(grid, sequences, meta)
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".meta.json");
    os.into()
}

/// Write the NTDF file plus its JSON metadata sidecar.
pub fn write_dataset(dataset: &TrajectoryDataset, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&dataset_to_bytes(dataset))?;
    w.flush()?;
    let meta = serde_json::to_vec_pretty(dataset.meta())?;
    std::fs::write(sidecar_path(path), meta)?;
    Ok(())
}

/// Read an NTDF file; the sidecar is optional and defaults when absent.
pub fn read_dataset(path: &Path) -> Result<TrajectoryDataset> {
    let meta = match std::fs::read(sidecar_path(path)) {
        Ok(bytes) => serde_json::from_slice(&bytes)?,
        Err(_) => DatasetMeta::default(),
    };
    dataset_from_reader(BufReader::new(File::open(path)?), meta)
}
