//! Point-cloud files.
//!
//! Binary (`.mpcl`), all little-endian:
//!
//! ```text
//! "MPCL" u32:version(=1)
//! u32:dim u32:stage u8:kind [3 zero bytes] u64:seed
//! f64:epsilon f64:eta f64:tau
//! u32:len(y) f64*len(y)
//! f64:residual_equations f64:residual_sphere
//! u64:proposals u64:accepted u64:duplicates u8:saturated [7 zero bytes]
//! u64:points f64*(points*dim)
//! u64:singular u32*singular
//! ```
//!
//! kind: 0 fiber, 1 boundary, 2 link, 3 page.
//!
//! CSV (`.csv`): a `# milnor-pointcloud v1` line, then `# key=value` lines
//! for the same header fields (vectors joined with `;`), then a header row
//! `x1,...,xM` and one row per point.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use thiserror::Error;

use super::{PointCloud, Radii, Residuals, SampleStats, TargetKind};

const MAGIC: &[u8; 4] = b"MPCL";
const VERSION: u32 = 1;
const CSV_BANNER: &str = "# milnor-pointcloud v1";

#[derive(Debug, Error)]
pub enum CloudIoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("malformed point cloud: {0}")]
    Format(String),
}

fn bad(msg: impl Into<String>) -> CloudIoError {
    CloudIoError::Format(msg.into())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N], CloudIoError> {
        let mut b = [0u8; N];
        self.inner.read_exact(&mut b)?;
        Ok(b)
    }
    fn u32(&mut self) -> Result<u32, CloudIoError> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> Result<u64, CloudIoError> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn f64(&mut self) -> Result<f64, CloudIoError> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
}

impl PointCloud {
    pub fn write_binary<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        w.write_all(&(self.stage as u32).to_le_bytes())?;
        w.write_all(&[self.kind.code(), 0, 0, 0])?;
        w.write_all(&self.seed.to_le_bytes())?;
        for v in [self.radii.epsilon, self.radii.eta, self.radii.tau] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&(self.regular_value.len() as u32).to_le_bytes())?;
        for v in &self.regular_value {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&self.residuals.equations.to_le_bytes())?;
        w.write_all(&self.residuals.sphere.to_le_bytes())?;
        for v in [self.stats.proposals, self.stats.accepted, self.stats.duplicates] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&[u8::from(self.stats.saturated), 0, 0, 0, 0, 0, 0, 0])?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        for v in &self.coords {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&(self.singular.len() as u64).to_le_bytes())?;
        for v in &self.singular {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_binary(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn read_binary<R: Read>(r: R) -> Result<Self, CloudIoError> {
        let mut r = Reader { inner: r };
        if &r.bytes::<4>()? != MAGIC {
            return Err(bad("bad magic"));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        let dim = r.u32()? as usize;
        let stage = r.u32()? as usize;
        let [kind, ..] = r.bytes::<4>()?;
        let kind = TargetKind::from_code(kind).ok_or_else(|| bad("bad kind"))?;
        let seed = r.u64()?;
        let radii = Radii {
            epsilon: r.f64()?,
            eta: r.f64()?,
            tau: r.f64()?,
        };
        let ny = r.u32()? as usize;
        let regular_value = (0..ny).map(|_| r.f64()).collect::<Result<_, _>>()?;
        let residuals = Residuals {
            equations: r.f64()?,
            sphere: r.f64()?,
        };
        let (proposals, accepted, duplicates) = (r.u64()?, r.u64()?, r.u64()?);
        let saturated = r.bytes::<8>()?[0] != 0;
        let n = r.u64()? as usize;
        let coords = (0..n * dim).map(|_| r.f64()).collect::<Result<_, _>>()?;
        let ns = r.u64()? as usize;
        let singular = (0..ns).map(|_| r.u32()).collect::<Result<_, _>>()?;
        if r.inner.read(&mut [0u8; 1])? != 0 {
            return Err(bad("trailing bytes"));
        }
        Ok(PointCloud {
            dim,
            kind,
            stage,
            regular_value,
            radii,
            seed,
            residuals,
            coords,
            singular,
            stats: SampleStats {
                proposals,
                accepted,
                duplicates,
                saturated,
            },
        })
    }

    pub fn to_csv(&self) -> String {
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
        let mut out = String::new();
        let mut meta = |k: &str, v: String| out.push_str(&format!("# {k}={v}\n"));
        meta("dim", self.dim.to_string());
        meta("stage", self.stage.to_string());
        meta("kind", self.kind.name().to_string());
        meta("seed", self.seed.to_string());
        meta("epsilon", self.radii.epsilon.to_string());
        meta("eta", self.radii.eta.to_string());
        meta("tau", self.radii.tau.to_string());
        meta("y", join(&self.regular_value));
        meta("residual_equations", self.residuals.equations.to_string());
        meta("residual_sphere", self.residuals.sphere.to_string());
        meta("proposals", self.stats.proposals.to_string());
        meta("accepted", self.stats.accepted.to_string());
        meta("duplicates", self.stats.duplicates.to_string());
        meta("saturated", self.stats.saturated.to_string());
        meta(
            "singular",
            self.singular.iter().map(u32::to_string).collect::<Vec<_>>().join(";"),
        );
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<String> = (1..=self.dim).map(|i| format!("x{i}")).collect();
        w.write_record(&header).expect("in-memory csv");
        for p in self.points() {
            w.write_record(p.iter().map(f64::to_string)).expect("in-memory csv");
        }
        let body = String::from_utf8(w.into_inner().expect("flush")).expect("utf8");
        format!("{CSV_BANNER}\n{out}{body}")
    }

    pub fn from_csv(text: &str) -> Result<Self, CloudIoError> {
        let mut lines = text.lines();
        if lines.next() != Some(CSV_BANNER) {
            return Err(bad("missing banner line"));
        }
        let mut meta = std::collections::HashMap::new();
        for line in text.lines().skip(1) {
            let Some(rest) = line.strip_prefix("# ") else { break };
            let (k, v) = rest.split_once('=').ok_or_else(|| bad(format!("bad meta line {line:?}")))?;
            meta.insert(k.to_string(), v.to_string());
        }
        let get = |k: &str| meta.get(k).ok_or_else(|| bad(format!("missing {k}")));
        fn num<T: std::str::FromStr>(s: &str) -> Result<T, CloudIoError> {
            s.parse().map_err(|_| bad(format!("bad number {s:?}")))
        }
        fn list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, CloudIoError> {
            s.split(';').filter(|p| !p.is_empty()).map(num).collect()
        }
        let dim: usize = num(get("dim")?)?;
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut coords = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != dim {
                return Err(bad(format!("row has {} columns, expected {dim}", rec.len())));
            }
            for v in rec.iter() {
                coords.push(num(v)?);
            }
        }
        Ok(PointCloud {
            dim,
            kind: get("kind")?.parse().map_err(bad)?,
            stage: num(get("stage")?)?,
            regular_value: list(get("y")?)?,
            radii: Radii {
                epsilon: num(get("epsilon")?)?,
                eta: num(get("eta")?)?,
                tau: num(get("tau")?)?,
            },
            seed: num(get("seed")?)?,
            residuals: Residuals {
                equations: num(get("residual_equations")?)?,
                sphere: num(get("residual_sphere")?)?,
            },
            coords,
            singular: list(get("singular")?)?,
            stats: SampleStats {
                proposals: num(get("proposals")?)?,
                accepted: num(get("accepted")?)?,
                duplicates: num(get("duplicates")?)?,
                saturated: num(get("saturated")?)?,
            },
        })
    }

    /// Writes CSV for a `.csv` extension and binary otherwise.
    pub fn save(&self, path: &Path) -> Result<(), CloudIoError> {
        if path.extension().is_some_and(|e| e == "csv") {
            fs::write(path, self.to_csv())?;
        } else {
            fs::write(path, self.to_binary())?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CloudIoError> {
        if path.extension().is_some_and(|e| e == "csv") {
            Self::from_csv(&fs::read_to_string(path)?)
        } else {
            Self::read_binary(fs::File::open(path).map(io::BufReader::new)?)
        }
    }
}
