//! Narrowband, integrated-wideband and DPSS dictionaries over 1-D or M-D
//! frequency grids.
//!
//! Every column is tied to a [`Cell`]: one frequency [`Band`] per dimension.
//! Narrowband atoms sit at the band centre, integrated atoms integrate over the
//! band, DPSS atoms are Slepian tapers spanning the band. Columns are stored
//! with unit ℓ2 norm and the original norms are kept so amplitudes can be
//! mapped back to the physical scale.

mod atoms;
mod dpss;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use atoms::{narrowband_atom, wideband_atom};
pub use dpss::{dpss_atom, first_slepian, DpssConfig};

use crate::error::{invalid, Error, Result};
use crate::numerics::{
    kron_vectors, kronecker_with_limit, norm2, CMatrix, C64, DEFAULT_MAX_ENTRIES,
};

/// Tolerance used when deciding whether two band edges coincide.
pub const EDGE_TOL: f64 = 1e-12;

/// Distance between two frequencies on the unit circle.
pub fn torus_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Reduces a frequency into `[0, 1)`.
pub fn wrap_frequency(f: f64) -> f64 {
    let w = f.rem_euclid(1.0);
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// A frequency interval `[lo, hi]` inside `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(invalid(format!(
                "band [{lo}, {hi}] is not a sub-interval of [0, 1]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Whether `f` (taken modulo 1) lies in the closed band.
    pub fn contains(&self, f: f64) -> bool {
        let f = wrap_frequency(f);
        (f >= self.lo - EDGE_TOL && f <= self.hi + EDGE_TOL)
            || (self.hi >= 1.0 - EDGE_TOL && f <= EDGE_TOL)
            || (self.lo <= EDGE_TOL && f >= 1.0 - EDGE_TOL)
    }

    /// Whether the two bands overlap or share an edge on the circle.
    pub fn touches(&self, other: &Band) -> bool {
        let gap = |a: &Band, b: &Band| (b.lo - a.hi).rem_euclid(1.0);
        let overlap = self.lo <= other.hi + EDGE_TOL && other.lo <= self.hi + EDGE_TOL;
        overlap
            || gap(self, other) <= EDGE_TOL
            || gap(other, self) <= EDGE_TOL
            || gap(self, other) >= 1.0 - EDGE_TOL
            || gap(other, self) >= 1.0 - EDGE_TOL
    }

    /// Splits into `count` equal children. The outer edges are copied from the
    /// parent so neighbouring parents keep sharing bit-identical edges.
    pub fn split(&self, count: usize) -> Vec<Band> {
        let w = self.hi - self.lo;
        let edge = |k: usize| -> f64 {
            if k == 0 {
                self.lo
            } else if k == count {
                self.hi
            } else {
                self.lo + w * k as f64 / count as f64
            }
        };
        (0..count)
            .map(|k| Band {
                lo: edge(k),
                hi: edge(k + 1),
            })
            .collect()
    }
}

/// The per-dimension frequency bands of one dictionary column.
pub type Cell = Vec<Band>;

/// Ordered, non-overlapping bands along one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandGrid {
    bands: Vec<Band>,
}

impl BandGrid {
    /// `count` equal bands partitioning `[0, 1)`.
    pub fn uniform(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(invalid("band grid needs at least one band"));
        }
        Ok(Self {
            bands: Band { lo: 0.0, hi: 1.0 }.split(count),
        })
    }

    /// Contiguous bands between consecutive `edges`.
    pub fn from_edges(edges: &[f64]) -> Result<Self> {
        let bands = edges
            .windows(2)
            .map(|w| Band::new(w[0], w[1]))
            .collect::<Result<Vec<_>>>()?;
        Self::from_bands(bands)
    }

    pub fn from_bands(bands: Vec<Band>) -> Result<Self> {
        if bands.is_empty() {
            return Err(invalid("band grid needs at least one band"));
        }
        for b in &bands {
            Band::new(b.lo, b.hi)?;
        }
        if bands.windows(2).any(|w| w[1].lo < w[0].hi) {
            return Err(invalid("bands must be sorted and non-overlapping"));
        }
        Ok(Self { bands })
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    pub fn len(&self) -> usize {
        self.bands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }

    /// Band centres, i.e. the narrowband grid points.
    pub fn points(&self) -> Vec<f64> {
        self.bands.iter().map(Band::center).collect()
    }

    /// All band edges with shared edges of adjacent bands listed once.
    pub fn edges(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::with_capacity(self.bands.len() + 1);
        for b in &self.bands {
            if out.last() != Some(&b.lo) {
                out.push(b.lo);
            }
            out.push(b.hi);
        }
        out
    }
}

/// Sample instants per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingScheme {
    times: Vec<Vec<f64>>,
}

impl SamplingScheme {
    pub fn new(times: Vec<Vec<f64>>) -> Result<Self> {
        if times.is_empty() {
            return Err(invalid("sampling scheme needs at least one dimension"));
        }
        for (m, t) in times.iter().enumerate() {
            if t.is_empty() {
                return Err(invalid(format!("dimension {m} has no samples")));
            }
            if t.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("sample times"));
            }
            if t.windows(2).any(|w| w[1] <= w[0]) {
                return Err(invalid(format!(
                    "sample times of dimension {m} are not strictly increasing"
                )));
            }
        }
        Ok(Self { times })
    }

    /// `0, 1, …, n−1` in one dimension.
    pub fn uniform(n: usize) -> Self {
        Self::uniform_grid(&[n])
    }

    /// Uniform integer sampling in each dimension.
    pub fn uniform_grid(sizes: &[usize]) -> Self {
        Self {
            times: sizes
                .iter()
                .map(|&n| (0..n).map(|i| i as f64).collect())
                .collect(),
        }
    }

    pub fn dims(&self) -> usize {
        self.times.len()
    }

    pub fn times(&self, dim: usize) -> &[f64] {
        &self.times[dim]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.times.iter().map(Vec::len).collect()
    }

    /// Total number of samples of the vectorized tensor.
    pub fn total_len(&self) -> usize {
        self.times.iter().map(Vec::len).product()
    }

    pub fn is_integer_uniform(&self, dim: usize) -> bool {
        self.times[dim]
            .iter()
            .enumerate()
            .all(|(n, &t)| t == n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AtomKind {
    Narrowband,
    #[serde(alias = "integrated", alias = "wideband")]
    WidebandIntegrated,
    #[serde(alias = "dpss")]
    WidebandDpss,
}

impl AtomKind {
    pub fn is_wideband(self) -> bool {
        !matches!(self, AtomKind::Narrowband)
    }
}

impl std::str::FromStr for AtomKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "narrowband" | "nb" => Ok(AtomKind::Narrowband),
            "wideband-integrated" | "integrated" | "wideband" | "wb" => {
                Ok(AtomKind::WidebandIntegrated)
            }
            "wideband-dpss" | "dpss" => Ok(AtomKind::WidebandDpss),
            other => Err(invalid(format!("unknown atom kind `{other}`"))),
        }
    }
}

/// Relative half-bandwidth used for DPSS atoms when none is given.
pub const DEFAULT_DPSS_RELATIVE_W: f64 = 1.0 / 2.1;

/// A normalized dictionary together with the band of every column.
#[derive(Debug, Clone)]
pub struct Dictionary {
    matrix: CMatrix,
    cells: Vec<Cell>,
    column_norms: Vec<f64>,
    kind: AtomKind,
}

impl Dictionary {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, j: usize) -> &Cell {
        &self.cells[j]
    }

    pub fn column_norms(&self) -> &[f64] {
        &self.column_norms
    }

    pub fn kind(&self) -> AtomKind {
        self.kind
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn len(&self) -> usize {
        self.matrix.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.cols() == 0
    }

    /// Dictionary whose columns are given explicitly by their cells; used for
    /// zoom stages where the surviving bands no longer form a full grid.
    pub fn from_cells(
        scheme: &SamplingScheme,
        cells: Vec<Cell>,
        kind: AtomKind,
        dpss: Option<DpssConfig>,
        max_entries: usize,
    ) -> Result<Self> {
        let n = scheme.total_len();
        check_ceiling(n, cells.len(), max_entries)?;
        let mut factory = AtomFactory::new(scheme, kind, dpss)?;
        let mut data = Vec::with_capacity(n * cells.len());
        for cell in &cells {
            if cell.len() != scheme.dims() {
                return Err(Error::DimensionMismatch {
                    what: "cell dimensions",
                    expected: scheme.dims(),
                    got: cell.len(),
                });
            }
            let parts = cell
                .iter()
                .enumerate()
                .map(|(m, b)| factory.atom(m, b))
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<&[C64]> = parts.iter().map(|p| p.as_slice()).collect();
            data.extend(kron_vectors(&refs));
        }
        let matrix = CMatrix::new(n, cells.len(), data)?;
        Ok(Self::normalized(matrix, cells, kind))
    }

    fn normalized(mut matrix: CMatrix, cells: Vec<Cell>, kind: AtomKind) -> Self {
        let mut column_norms = Vec::with_capacity(matrix.cols());
        for j in 0..matrix.cols() {
            let col = matrix.col_mut(j);
            let nrm = norm2(col);
            if nrm > 0.0 {
                let inv = 1.0 / nrm;
                col.iter_mut().for_each(|v| *v *= inv);
            }
            column_norms.push(nrm);
        }
        Self {
            matrix,
            cells,
            column_norms,
            kind,
        }
    }

    /// Column metadata for inspection; not a stable interchange format.
    pub fn metadata(&self) -> Vec<ColumnMeta> {
        self.cells
            .iter()
            .zip(&self.column_norms)
            .enumerate()
            .map(|(index, (cell, &norm))| ColumnMeta {
                index,
                bands: cell.clone(),
                norm,
            })
            .collect()
    }

    pub fn metadata_csv(&self) -> String {
        let dims = self.cells.first().map_or(0, Vec::len);
        let mut out = String::from("index,norm");
        for m in 0..dims {
            out.push_str(&format!(",lo{m},hi{m},center{m}"));
        }
        out.push('\n');
        for meta in self.metadata() {
            out.push_str(&format!("{},{:e}", meta.index, meta.norm));
            for b in &meta.bands {
                out.push_str(&format!(",{:e},{:e},{:e}", b.lo, b.hi, b.center()));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_debug_json(&self, include_matrix: bool) -> serde_json::Value {
        let mut v = serde_json::json!({
            "kind": self.kind,
            "rows": self.rows(),
            "columns": self.metadata(),
        });
        if include_matrix {
            let cols: Vec<Vec<[f64; 2]>> = (0..self.len())
                .map(|j| self.matrix.col(j).iter().map(|c| [c.re, c.im]).collect())
                .collect();
            v["matrix"] = serde_json::json!(cols);
        }
        v
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub index: usize,
    pub bands: Cell,
    pub norm: f64,
}

fn check_ceiling(rows: usize, cols: usize, max_entries: usize) -> Result<()> {
    match rows.checked_mul(cols) {
        Some(t) if t <= max_entries => Ok(()),
        t => Err(Error::TooLarge {
            what: "dictionary",
            requested: t.unwrap_or(usize::MAX),
            limit: max_entries,
        }),
    }
}

/// Builds the full-grid dictionary `D^(M) ⊗ … ⊗ D^(1)` with the default
/// size ceiling. Column `j₁ + P₁ j₂ + …` corresponds to band `j_m` in
/// dimension `m`.
pub fn build_dictionary(
    scheme: &SamplingScheme,
    grids: &[BandGrid],
    kind: AtomKind,
    dpss: Option<DpssConfig>,
) -> Result<Dictionary> {
    build_dictionary_with_limit(scheme, grids, kind, dpss, DEFAULT_MAX_ENTRIES)
}

pub fn build_dictionary_with_limit(
    scheme: &SamplingScheme,
    grids: &[BandGrid],
    kind: AtomKind,
    dpss: Option<DpssConfig>,
    max_entries: usize,
) -> Result<Dictionary> {
    if grids.len() != scheme.dims() {
        return Err(Error::DimensionMismatch {
            what: "grid dimensions",
            expected: scheme.dims(),
            got: grids.len(),
        });
    }
    let cols: usize = grids.iter().map(BandGrid::len).product();
    check_ceiling(scheme.total_len(), cols, max_entries)?;

    let mut factory = AtomFactory::new(scheme, kind, dpss)?;
    let mut per_dim = Vec::with_capacity(grids.len());
    for (m, g) in grids.iter().enumerate() {
        let columns = g
            .bands()
            .iter()
            .map(|b| factory.atom(m, b))
            .collect::<Result<Vec<_>>>()?;
        per_dim.push(CMatrix::from_columns(scheme.times(m).len(), &columns)?);
    }
    // D^(M) ⊗ … ⊗ D^(1)
    let mut matrix = per_dim.pop().expect("at least one dimension");
    while let Some(next) = per_dim.pop() {
        matrix = kronecker_with_limit(&matrix, &next, max_entries)?;
    }

    let mut cells = Vec::with_capacity(cols);
    let mut idx = vec![0usize; grids.len()];
    for _ in 0..cols {
        cells.push(idx.iter().zip(grids).map(|(&i, g)| g.bands()[i]).collect());
        for (m, g) in grids.iter().enumerate() {
            idx[m] += 1;
            if idx[m] < g.len() {
                break;
            }
            idx[m] = 0;
        }
    }
    Ok(Dictionary::normalized(matrix, cells, kind))
}

/// Caches per-dimension atoms; zoom stages ask for the same band many times
/// in M-D and DPSS tapers are shared by every band of equal width.
struct AtomFactory<'a> {
    scheme: &'a SamplingScheme,
    kind: AtomKind,
    relative_w: f64,
    atoms: HashMap<(usize, u64, u64), Vec<C64>>,
    tapers: HashMap<(usize, u64), Vec<f64>>,
}

impl<'a> AtomFactory<'a> {
    fn new(scheme: &'a SamplingScheme, kind: AtomKind, dpss: Option<DpssConfig>) -> Result<Self> {
        let mut relative_w = DEFAULT_DPSS_RELATIVE_W;
        if kind == AtomKind::WidebandDpss {
            for m in 0..scheme.dims() {
                if !scheme.is_integer_uniform(m) {
                    return Err(invalid(format!(
                        "DPSS atoms need uniform integer sampling (dimension {m})"
                    )));
                }
            }
            if let Some(cfg) = dpss {
                cfg.validate()?;
                if scheme.sizes().iter().any(|&n| n != cfg.q) {
                    return Err(invalid(format!(
                        "DPSS length {} does not match the sampling sizes {:?}",
                        cfg.q,
                        scheme.sizes()
                    )));
                }
                relative_w = cfg.w;
            }
        }
        Ok(Self {
            scheme,
            kind,
            relative_w,
            atoms: HashMap::new(),
            tapers: HashMap::new(),
        })
    }

    fn atom(&mut self, dim: usize, band: &Band) -> Result<Vec<C64>> {
        let key = (dim, band.lo.to_bits(), band.hi.to_bits());
        if let Some(a) = self.atoms.get(&key) {
            return Ok(a.clone());
        }
        let times = self.scheme.times(dim);
        let atom = match self.kind {
            AtomKind::Narrowband => narrowband_atom(band.center(), times),
            AtomKind::WidebandIntegrated => wideband_atom(band.lo, band.hi, times)?,
            AtomKind::WidebandDpss => {
                // the taper's half-bandwidth is the configured fraction of the band width
                let w = self.relative_w * band.width();
                let q = times.len();
                let tkey = (q, w.to_bits());
                let taper = match self.tapers.entry(tkey) {
                    std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(first_slepian(DpssConfig::new(q, w)?)?)
                    }
                };
                dpss::modulate(taper, band.center(), times)
            }
        };
        self.atoms.insert(key, atom.clone());
        Ok(atom)
    }
}

/// `|dᵢᴴ y|` for every column, optionally scaled so the largest is one.
pub fn inner_product_scan(dict: &Dictionary, y: &[C64], normalize: bool) -> Result<Vec<f64>> {
    let mut s: Vec<f64> = dict
        .matrix()
        .hermitian_product(y)?
        .into_iter()
        .map(|c| c.norm())
        .collect();
    if normalize {
        let max = s.iter().cloned().fold(0.0, f64::max);
        if max > 0.0 {
            s.iter_mut().for_each(|v| *v /= max);
        }
    }
    Ok(s)
}
