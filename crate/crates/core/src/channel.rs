//! Network realizations: user placement, path loss, Rayleigh fading and the
//! per-subchannel power gains of every link the rate model needs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{db_loss_to_gain, dbm_to_watts};

pub const SCHEMA_VERSION: u32 = 1;

/// Path-loss model in dB as a function of link distance.
///
/// Distances are converted to kilometres before evaluating the log-distance
/// law, so `128.1 + 37.6 log10(d)` takes `d` in km.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum PathLoss {
    LogDistance { intercept_db: f64, slope_db: f64 },
    Constant { db: f64 },
}

impl PathLoss {
    pub const CELLULAR: PathLoss = PathLoss::LogDistance {
        intercept_db: 128.1,
        slope_db: 37.6,
    };
    pub const D2D: PathLoss = PathLoss::LogDistance {
        intercept_db: 148.1,
        slope_db: 40.0,
    };

    pub fn db(&self, distance_m: f64) -> f64 {
        match *self {
            PathLoss::LogDistance {
                intercept_db,
                slope_db,
            } => intercept_db + slope_db * (distance_m / 1000.0).log10(),
            PathLoss::Constant { db } => db,
        }
    }

    fn is_monotone(&self) -> bool {
        match *self {
            PathLoss::LogDistance { slope_db, .. } => slope_db > 0.0,
            PathLoss::Constant { .. } => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometryConfig {
    pub cell_diameter_m: f64,
    pub d2d_link_distance_m: f64,
    /// Users are kept at least this far from the BS, and every link distance
    /// is floored at this value before the path loss is evaluated.
    pub min_distance_m: f64,
    pub pathloss_cell: PathLoss,
    pub pathloss_d2d: PathLoss,
    pub noise_cu_dbm: f64,
    pub noise_du_dbm: f64,
    /// Multiply every gain by an independent unit-mean exponential draw.
    pub fading: bool,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            cell_diameter_m: 250.0,
            d2d_link_distance_m: 30.0,
            min_distance_m: 10.0,
            pathloss_cell: PathLoss::CELLULAR,
            pathloss_d2d: PathLoss::D2D,
            noise_cu_dbm: -120.0,
            noise_du_dbm: -120.0,
            fading: true,
        }
    }
}

impl GeometryConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("cell_diameter_m", self.cell_diameter_m),
            ("d2d_link_distance_m", self.d2d_link_distance_m),
            ("min_distance_m", self.min_distance_m),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.min_distance_m >= self.cell_diameter_m / 2.0 {
            return Err(Error::InvalidConfig(
                "min_distance_m must be below the cell radius".into(),
            ));
        }
        if !self.pathloss_cell.is_monotone() || !self.pathloss_d2d.is_monotone() {
            return Err(Error::InvalidConfig(
                "path-loss slope must be positive".into(),
            ));
        }
        if !self.noise_cu_dbm.is_finite() || !self.noise_du_dbm.is_finite() {
            return Err(Error::InvalidConfig("noise powers must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub m_cus: usize,
    pub k_dus: usize,
    pub n_sub: usize,
}

impl Dims {
    pub fn new(m_cus: usize, k_dus: usize, n_sub: usize) -> Self {
        Self {
            m_cus,
            k_dus,
            n_sub,
        }
    }
}

/// One channel realization. All gains are linear power gains.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkInstance {
    pub m_cus: usize,
    pub k_dus: usize,
    pub n_sub: usize,
    /// `[M][N]`, CU `m` to the BS.
    pub g_cu_bs: Vec<Vec<f64>>,
    /// `[K][N]`, DU transmitter `k` to the BS.
    pub h_du_bs: Vec<Vec<f64>>,
    /// `[K][N]`, DU transmitter `k` to its own receiver.
    pub h_du_du_desired: Vec<Vec<f64>>,
    /// `[M][K][N]`, CU `m` to DU receiver `k`.
    pub g_cu_du: Vec<Vec<Vec<f64>>>,
    /// `[K][K][N]`, DU transmitter `j` to DU receiver `k`. The diagonal
    /// `j == k` is unused and stored as zero.
    pub h_du_du_cross: Vec<Vec<Vec<f64>>>,
    /// Noise power per subchannel at the BS, watts.
    pub noise_cu: f64,
    /// Noise power per subchannel at a DU receiver, watts.
    pub noise_du: f64,
    pub seed: u64,
}

fn check_matrix(name: &str, m: &[Vec<f64>], rows: usize, cols: usize) -> Result<()> {
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        return Err(Error::Dimension(format!(
            "{name} must be {rows}x{cols}"
        )));
    }
    Ok(())
}

fn check_positive(name: &str, vals: impl IntoIterator<Item = f64>) -> Result<()> {
    for v in vals {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Schema(format!(
                "{name} contains a non-positive or non-finite gain ({v})"
            )));
        }
    }
    Ok(())
}

impl NetworkInstance {
    pub fn dims(&self) -> Dims {
        Dims::new(self.m_cus, self.k_dus, self.n_sub)
    }

    /// The instance restricted to the first `m` CUs and first `k` DUs.
    /// Instances of growing size drawn this way share their common links.
    pub fn subset(&self, m: usize, k: usize) -> Result<Self> {
        if m > self.m_cus || k > self.k_dus {
            return Err(Error::Dimension(format!(
                "cannot take {m} CUs and {k} DUs from {:?}",
                self.dims()
            )));
        }
        let rows = |v: &[Vec<f64>], r: usize| v[..r].to_vec();
        Ok(Self {
            m_cus: m,
            k_dus: k,
            n_sub: self.n_sub,
            g_cu_bs: rows(&self.g_cu_bs, m),
            h_du_bs: rows(&self.h_du_bs, k),
            h_du_du_desired: rows(&self.h_du_du_desired, k),
            g_cu_du: self.g_cu_du[..m].iter().map(|r| rows(r, k)).collect(),
            h_du_du_cross: self.h_du_du_cross[..k].iter().map(|r| rows(r, k)).collect(),
            noise_cu: self.noise_cu,
            noise_du: self.noise_du,
            seed: self.seed,
        })
    }

    /// Checks tensor shapes, gain positivity and noise positivity.
    pub fn validate(&self) -> Result<()> {
        let (m, k, n) = (self.m_cus, self.k_dus, self.n_sub);
        check_matrix("g_cu_bs", &self.g_cu_bs, m, n)?;
        check_matrix("h_du_bs", &self.h_du_bs, k, n)?;
        check_matrix("h_du_du_desired", &self.h_du_du_desired, k, n)?;
        if self.g_cu_du.len() != m {
            return Err(Error::Dimension(format!("g_cu_du must have {m} rows")));
        }
        for row in &self.g_cu_du {
            check_matrix("g_cu_du", row, k, n)?;
        }
        if self.h_du_du_cross.len() != k {
            return Err(Error::Dimension(format!("h_du_du_cross must have {k} rows")));
        }
        for row in &self.h_du_du_cross {
            check_matrix("h_du_du_cross", row, k, n)?;
        }
        check_positive("g_cu_bs", self.g_cu_bs.iter().flatten().copied())?;
        check_positive("h_du_bs", self.h_du_bs.iter().flatten().copied())?;
        check_positive(
            "h_du_du_desired",
            self.h_du_du_desired.iter().flatten().copied(),
        )?;
        check_positive("g_cu_du", self.g_cu_du.iter().flatten().flatten().copied())?;
        for (j, row) in self.h_du_du_cross.iter().enumerate() {
            for (kk, gains) in row.iter().enumerate() {
                if j == kk {
                    if gains.iter().any(|&g| g != 0.0) {
                        return Err(Error::Schema(
                            "h_du_du_cross diagonal must be zero".into(),
                        ));
                    }
                } else {
                    check_positive("h_du_du_cross", gains.iter().copied())?;
                }
            }
        }
        if !(self.noise_cu > 0.0 && self.noise_cu.is_finite())
            || !(self.noise_du > 0.0 && self.noise_du.is_finite())
        {
            return Err(Error::Schema("noise powers must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Point {
    x: f64,
    y: f64,
}

impl Point {
    fn dist(self, o: Point) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }
}

fn uniform_in_annulus(rng: &mut impl Rng, r_min: f64, r_max: f64) -> Point {
    let u: f64 = rng.random();
    let r = (u * (r_max * r_max - r_min * r_min) + r_min * r_min).sqrt();
    let theta = rng.random::<f64>() * std::f64::consts::TAU;
    Point {
        x: r * theta.cos(),
        y: r * theta.sin(),
    }
}

/// Unit-mean exponential power fading (Rayleigh amplitude).
pub fn rayleigh_power(rng: &mut impl Rng) -> f64 {
    rng.sample(Exp1)
}

/// Draws one network realization. Deterministic in `(geometry, dims, seed)`.
///
/// CUs and DU transmitters are uniform over the cell disc (outside
/// `min_distance_m` of the BS); each DU receiver sits `d2d_link_distance_m`
/// away from its transmitter in a uniform direction. Device-to-device links
/// (including CU to DU receiver) use the D2D path-loss law, links ending at the
/// BS use the cellular one.
pub fn generate_instance(geometry: &GeometryConfig, dims: Dims, seed: u64) -> Result<NetworkInstance> {
    geometry.validate()?;
    if dims.m_cus == 0 || dims.k_dus == 0 || dims.n_sub == 0 {
        return Err(Error::InvalidConfig(format!(
            "dimensions must be at least 1, got {dims:?}"
        )));
    }
    let (m, k, n) = (dims.m_cus, dims.k_dus, dims.n_sub);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = geometry.cell_diameter_m / 2.0;
    let r0 = geometry.min_distance_m;
    let bs = Point { x: 0.0, y: 0.0 };

    let cus: Vec<Point> = (0..m)
        .map(|_| uniform_in_annulus(&mut rng, r0, radius))
        .collect();
    let du_tx: Vec<Point> = (0..k)
        .map(|_| uniform_in_annulus(&mut rng, r0, radius))
        .collect();
    let du_rx: Vec<Point> = du_tx
        .iter()
        .map(|t| {
            let theta = rng.random::<f64>() * std::f64::consts::TAU;
            Point {
                x: t.x + geometry.d2d_link_distance_m * theta.cos(),
                y: t.y + geometry.d2d_link_distance_m * theta.sin(),
            }
        })
        .collect();

    let fading = geometry.fading;
    let link = |pl: &PathLoss, d: f64, rng: &mut ChaCha8Rng| -> Vec<f64> {
        let mean = db_loss_to_gain(pl.db(d.max(r0)));
        (0..n)
            .map(|_| if fading { mean * rayleigh_power(rng) } else { mean })
            .collect()
    };

    let cell = geometry.pathloss_cell;
    let d2d = geometry.pathloss_d2d;
    let g_cu_bs = cus.iter().map(|c| link(&cell, c.dist(bs), &mut rng)).collect();
    let h_du_bs = du_tx.iter().map(|t| link(&cell, t.dist(bs), &mut rng)).collect();
    let h_du_du_desired = du_tx
        .iter()
        .zip(&du_rx)
        .map(|(t, r)| link(&d2d, t.dist(*r), &mut rng))
        .collect();
    let g_cu_du = cus
        .iter()
        .map(|c| du_rx.iter().map(|r| link(&d2d, c.dist(*r), &mut rng)).collect())
        .collect();
    let h_du_du_cross = du_tx
        .iter()
        .enumerate()
        .map(|(j, t)| {
            du_rx
                .iter()
                .enumerate()
                .map(|(kk, r)| {
                    if j == kk {
                        vec![0.0; n]
                    } else {
                        link(&d2d, t.dist(*r), &mut rng)
                    }
                })
                .collect()
        })
        .collect();

    let inst = NetworkInstance {
        m_cus: m,
        k_dus: k,
        n_sub: n,
        g_cu_bs,
        h_du_bs,
        h_du_du_desired,
        g_cu_du,
        h_du_du_cross,
        noise_cu: dbm_to_watts(geometry.noise_cu_dbm),
        noise_du: dbm_to_watts(geometry.noise_du_dbm),
        seed,
    };
    inst.validate()?;
    Ok(inst)
}

#[derive(Serialize, Deserialize)]
struct NoiseFile {
    cu: f64,
    du: f64,
}

#[derive(Serialize, Deserialize)]
struct GainsFile {
    g_cu_bs: Vec<Vec<f64>>,
    h_du_bs: Vec<Vec<f64>>,
    h_du_du_desired: Vec<Vec<f64>>,
    g_cu_du: Vec<Vec<Vec<f64>>>,
    h_du_du_cross: Vec<Vec<Vec<f64>>>,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    schema_version: u32,
    seed: u64,
    dims: Dims,
    noise: NoiseFile,
    gains: GainsFile,
}

/// JSON formatter that prints every float with 17 significant digits.
pub struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes `value` as compact JSON with full-precision floats.
pub fn to_json_full_precision<T: Serialize, W: Write>(writer: W, value: &T) -> Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(writer, FullPrecision);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Schema(e.to_string()))
}

impl NetworkInstance {
    pub fn to_writer<W: Write>(&self, writer: W) -> Result<()> {
        let file = InstanceFile {
            schema_version: SCHEMA_VERSION,
            seed: self.seed,
            dims: self.dims(),
            noise: NoiseFile {
                cu: self.noise_cu,
                du: self.noise_du,
            },
            gains: GainsFile {
                g_cu_bs: self.g_cu_bs.clone(),
                h_du_bs: self.h_du_bs.clone(),
                h_du_du_desired: self.h_du_du_desired.clone(),
                g_cu_du: self.g_cu_du.clone(),
                h_du_du_cross: self.h_du_du_cross.clone(),
            },
        };
        to_json_full_precision(writer, &file)
    }

    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_reader(reader).map_err(|e| Error::Schema(e.to_string()))?;
        let found = value
            .get("schema_version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::Schema("missing field `schema_version`".into()))?;
        if found != u64::from(SCHEMA_VERSION) {
            return Err(Error::SchemaVersion {
                found: found as u32,
                expected: SCHEMA_VERSION,
            });
        }
        let file: InstanceFile =
            serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))?;
        let inst = NetworkInstance {
            m_cus: file.dims.m_cus,
            k_dus: file.dims.k_dus,
            n_sub: file.dims.n_sub,
            g_cu_bs: file.gains.g_cu_bs,
            h_du_bs: file.gains.h_du_bs,
            h_du_du_desired: file.gains.h_du_du_desired,
            g_cu_du: file.gains.g_cu_du,
            h_du_du_cross: file.gains.h_du_du_cross,
            noise_cu: file.noise.cu,
            noise_du: file.noise.du,
            seed: file.seed,
        };
        inst.validate()?;
        Ok(inst)
    }
}

pub fn save_instance(inst: &NetworkInstance, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    inst.to_writer(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<NetworkInstance> {
    NetworkInstance::from_reader(BufReader::new(File::open(path)?))
}
