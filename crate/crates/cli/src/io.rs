//! Series input and atomic output files.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use bandsparse::dict::SamplingScheme;
use bandsparse::C64;
use serde::Serialize;

/// A parsed observation: sampling scheme plus samples in first-dimension-fastest order.
#[derive(Debug, Clone)]
pub struct Series {
    pub scheme: SamplingScheme,
    pub y: Vec<C64>,
}

/// Reads `time,re,im` (1-D) or `<dim columns...>,re,im` (M-D, full grid).
pub fn read_series(path: &Path) -> Result<Series> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_series(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn parse_series(text: &str) -> Result<Series> {
    if text.trim().is_empty() {
        bail!("input is empty");
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (re_col, im_col) = match (find("re"), find("im")) {
        (Some(r), Some(i)) => (r, i),
        _ => bail!(
            "header must contain `re` and `im` columns (got {:?})",
            headers.iter().collect::<Vec<_>>()
        ),
    };
    let dim_cols: Vec<usize> = (0..headers.len())
        .filter(|&c| c != re_col && c != im_col)
        .collect();
    if dim_cols.is_empty() {
        bail!("no time/index column found");
    }

    let mut rows: Vec<(Vec<f64>, C64)> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("record {}", line + 2))?;
        let num = |c: usize| -> Result<f64> {
            let s = rec
                .get(c)
                .ok_or_else(|| anyhow!("record {}: missing column {}", line + 2, c + 1))?;
            let v: f64 = s
                .parse()
                .with_context(|| format!("record {}: `{s}` is not a number", line + 2))?;
            if !v.is_finite() {
                bail!("record {}: non-finite value", line + 2);
            }
            Ok(v)
        };
        let pos = dim_cols
            .iter()
            .map(|&c| num(c))
            .collect::<Result<Vec<_>>>()?;
        rows.push((pos, C64::new(num(re_col)?, num(im_col)?)));
    }
    if rows.is_empty() {
        bail!("input has a header but no samples");
    }

    if dim_cols.len() == 1 {
        rows.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]));
        if rows.windows(2).any(|w| w[0].0[0] == w[1].0[0]) {
            bail!("duplicate sample times");
        }
        let times = rows.iter().map(|r| r.0[0]).collect();
        return Ok(Series {
            scheme: SamplingScheme::new(vec![times])?,
            y: rows.into_iter().map(|r| r.1).collect(),
        });
    }

    // M-D: the positions must form a full grid
    let dims = dim_cols.len();
    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(dims);
    for m in 0..dims {
        let mut v: Vec<f64> = rows.iter().map(|r| r.0[m]).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        axes.push(v);
    }
    let total: usize = axes.iter().map(|a| a.len()).product();
    if total != rows.len() {
        bail!(
            "{} samples do not form a full {dims}-D grid of {total} points",
            rows.len()
        );
    }
    let mut grid: BTreeMap<usize, C64> = BTreeMap::new();
    for (pos, v) in rows {
        let mut idx = 0;
        let mut stride = 1;
        for m in 0..dims {
            let k = axes[m]
                .binary_search_by(|x| x.total_cmp(&pos[m]))
                .expect("value on axis");
            idx += k * stride;
            stride *= axes[m].len();
        }
        if grid.insert(idx, v).is_some() {
            bail!("duplicate grid position {pos:?}");
        }
    }
    Ok(Series {
        scheme: SamplingScheme::new(axes)?,
        y: grid.into_values().collect(),
    })
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path)
        .map_err(|e| e.error)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn csv_bytes<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| anyhow!("{e}"))
}

/// Output directory handle; every write goes through [`write_atomic`].
pub struct OutDir(pub PathBuf);

impl OutDir {
    pub fn create(path: &Path) -> Result<Self> {
        std::fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))?;
        let probe = tempfile::NamedTempFile::new_in(path)
            .with_context(|| format!("output directory {} is not writable", path.display()))?;
        drop(probe);
        Ok(Self(path.to_path_buf()))
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}
