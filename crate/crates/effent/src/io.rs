//! JSON schemas for matrices, states, channels and games, plus output
//! formatting helpers shared by the CLI.

use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::games::GameSpec;
use crate::qcore::{C64, CMat, DensityMatrix};
use crate::{Error, Result};

/// A complex matrix as `{"rows": n, "cols": m, "data": [[re, im], ...]}`,
/// row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMat) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push([m[(i, j)].re, m[(i, j)].im]);
            }
        }
        Self { rows: m.nrows(), cols: m.ncols(), data }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::InvalidArgument(format!(
                "matrix field `data` has {} entries for a {}x{} matrix",
                self.data.len(),
                self.rows,
                self.cols
            )));
        }
        Ok(CMat::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.data[i * self.cols + j];
            C64::new(re, im)
        }))
    }
}

/// A density matrix: the matrix schema plus its subsystem dimensions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityJson {
    #[serde(flatten)]
    pub matrix: MatrixJson,
    pub dims: Vec<usize>,
}

impl DensityJson {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        Self {
            matrix: MatrixJson::from_matrix(rho.matrix()),
            dims: rho.dims().to_vec(),
        }
    }

    pub fn to_density(&self, tol: f64) -> Result<DensityMatrix> {
        DensityMatrix::new(self.matrix.to_matrix()?, self.dims.clone(), tol)
    }
}

/// A Kraus channel: `{"d_in": n, "d_out": n, "kraus": [<matrix>...], "cptp"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelJson {
    pub d_in: usize,
    pub d_out: usize,
    pub kraus: Vec<MatrixJson>,
    pub cptp: bool,
}

impl ChannelJson {
    pub fn from_channel(ch: &KrausChannel) -> Self {
        Self {
            d_in: ch.d_in(),
            d_out: ch.d_out(),
            kraus: ch.kraus_ops().iter().map(MatrixJson::from_matrix).collect(),
            cptp: ch.is_cptp(),
        }
    }

    pub fn to_channel(&self, tol: f64) -> Result<KrausChannel> {
        let kraus = self
            .kraus
            .iter()
            .map(|m| m.to_matrix())
            .collect::<Result<Vec<_>>>()?;
        for k in &kraus {
            if k.nrows() != self.d_out || k.ncols() != self.d_in {
                return Err(Error::InvalidChannel(format!(
                    "Kraus operator is {}x{}, channel declares {}x{}",
                    k.nrows(),
                    k.ncols(),
                    self.d_out,
                    self.d_in
                )));
            }
        }
        KrausChannel::new(kraus, self.cptp, tol)
    }
}

/// A semiquantum game:
/// `{"p": [...], "q": [...], "zeta": [<dm>...], "eta": [<dm>...],
///   "payoff": 4-d nested array indexed [s][t][x][y]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameJson {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub zeta: Vec<DensityJson>,
    pub eta: Vec<DensityJson>,
    pub payoff: Vec<Vec<Vec<Vec<f64>>>>,
}

impl GameJson {
    pub fn to_game(&self, tol: f64) -> Result<GameSpec> {
        let zeta = self
            .zeta
            .iter()
            .map(|d| d.to_density(tol))
            .collect::<Result<Vec<_>>>()?;
        let eta = self
            .eta
            .iter()
            .map(|d| d.to_density(tol))
            .collect::<Result<Vec<_>>>()?;
        GameSpec::new(self.p.clone(), self.q.clone(), zeta, eta, &self.payoff)
    }
}

/// Rounds to 12 significant digits so printed results are reproducible across
/// platforms without drowning acceptance tolerances.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powi(11 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}

/// Loads and deserializes a JSON file.
pub fn read_json<T: for<'de> Deserialize<'de>>(path: &str) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
