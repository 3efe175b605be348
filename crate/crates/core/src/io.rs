//! Profile cache and report tables.
//!
//! A profile file is a block of `# key=value` metadata lines, the last of
//! which is `# sha256=<hex>` over the remaining bytes, followed by a CSV body
//! `r,U,V` with 17-significant-digit floats.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::continuation::ContinuationResult;
use crate::ground_state::{Diagnostics, GroundState, Normalization, SweepRecord};
use crate::oracle::OracleSolution;
use crate::radial::{RadialGrid, RadialProfile};
use crate::spectrum::SpectrumReport;
use crate::{Error, Result};

pub const GS_PREFIX: &str = "gs";
pub const ORACLE_PREFIX: &str = "oracle";

/// `{prefix}_N3_s{s:.4}_M{m}.csv`.
pub fn profile_filename(prefix: &str, s: f64, m: usize) -> String {
    format!("{prefix}_N3_s{s:.4}_M{m}.csv")
}

/// Round-trip-exact decimal form of an `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileMeta {
    pub kind: String,
    pub s: f64,
    pub m: usize,
    pub r_max: f64,
    pub nu_p: f64,
    pub nu_q: f64,
    pub residual: f64,
    pub iterations: usize,
    pub mode: Normalization,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileFile {
    pub meta: ProfileMeta,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl ProfileFile {
    pub fn from_ground_state(grid: &RadialGrid, gs: &GroundState) -> Result<Self> {
        grid.check(&gs.u.values)?;
        grid.check(&gs.v.values)?;
        Ok(Self {
            meta: ProfileMeta {
                kind: GS_PREFIX.into(),
                s: gs.s,
                m: grid.len(),
                r_max: grid.r_max(),
                nu_p: gs.nu_p,
                nu_q: gs.nu_q,
                residual: gs.diagnostics.residual,
                iterations: gs.diagnostics.iterations,
                mode: gs.mode,
            },
            r: grid.nodes().to_vec(),
            u: gs.u.values.clone(),
            v: gs.v.values.clone(),
        })
    }

    pub fn from_oracle(sol: &OracleSolution) -> Self {
        Self {
            meta: ProfileMeta {
                kind: ORACLE_PREFIX.into(),
                s: 1.0,
                m: sol.grid.len(),
                r_max: sol.grid.r_max(),
                nu_p: sol.nu_p,
                nu_q: sol.nu_q,
                residual: sol.residual,
                iterations: sol.iterations,
                mode: Normalization::Pstar,
            },
            r: sol.grid.nodes().to_vec(),
            u: sol.u.values.clone(),
            v: sol.v.values.clone(),
        }
    }

    pub fn filename(&self) -> String {
        profile_filename(&self.meta.kind, self.meta.s, self.meta.m)
    }

    /// Rebuild the ground state on `grid`, which must be the grid the file
    /// was written on.
    pub fn to_ground_state(&self, grid: &RadialGrid) -> Result<GroundState> {
        if self.meta.m != grid.len() {
            return Err(Error::GridMismatch {
                expected: grid.len(),
                got: self.meta.m,
            });
        }
        if self.meta.r_max != grid.r_max() || self.r != grid.nodes() {
            return Err(Error::Config(format!(
                "profile grid (R_max = {}) differs from the run grid (R_max = {})",
                self.meta.r_max,
                grid.r_max()
            )));
        }
        Ok(GroundState {
            s: self.meta.s,
            u: RadialProfile::new(self.u.clone(), 0),
            v: RadialProfile::new(self.v.clone(), 0),
            nu_p: self.meta.nu_p,
            nu_q: self.meta.nu_q,
            mode: self.meta.mode,
            diagnostics: Diagnostics {
                iterations: self.meta.iterations,
                residual: self.meta.residual,
                ..Default::default()
            },
        })
    }
}

fn sha256_hex(body: &str) -> String {
    hex::encode(Sha256::digest(body.as_bytes()))
}

pub fn render_profile(p: &ProfileFile) -> String {
    let mut body = String::from("r,U,V\n");
    for ((r, u), v) in p.r.iter().zip(&p.u).zip(&p.v) {
        let _ = writeln!(body, "{},{},{}", format_float(*r), format_float(*u), format_float(*v));
    }
    let m = &p.meta;
    let mut out = String::new();
    let _ = writeln!(out, "# kind={}", m.kind);
    let _ = writeln!(out, "# N=3");
    let _ = writeln!(out, "# s={}", format_float(m.s));
    let _ = writeln!(out, "# M={}", m.m);
    let _ = writeln!(out, "# R_max={}", format_float(m.r_max));
    let _ = writeln!(out, "# nu_P={}", format_float(m.nu_p));
    let _ = writeln!(out, "# nu_Q={}", format_float(m.nu_q));
    let _ = writeln!(out, "# residual={}", format_float(m.residual));
    let _ = writeln!(out, "# iterations={}", m.iterations);
    let _ = writeln!(out, "# mode={}", m.mode.as_str());
    let _ = writeln!(out, "# sha256={}", sha256_hex(&body));
    out.push_str(&body);
    out
}

pub fn write_profile(path: &Path, p: &ProfileFile) -> Result<()> {
    fs::write(path, render_profile(p))?;
    Ok(())
}

pub fn parse_profile(path: &str, text: &str) -> Result<ProfileFile> {
    let perr = |message: String| Error::Parse {
        path: path.to_string(),
        message,
    };
    let mut meta = std::collections::BTreeMap::new();
    let mut rest = text;
    let mut sha = None;
    while let Some(line) = rest.strip_prefix("# ") {
        let (line, tail) = line.split_once('\n').ok_or_else(|| perr("truncated metadata".into()))?;
        let (k, v) = line.split_once('=').ok_or_else(|| perr(format!("bad metadata line '{line}'")))?;
        rest = tail;
        if k == "sha256" {
            sha = Some(v.to_string());
            break;
        }
        meta.insert(k.to_string(), v.to_string());
    }
    let sha = sha.ok_or_else(|| perr("missing sha256 record".into()))?;
    if sha256_hex(rest) != sha {
        return Err(Error::Checksum { path: path.to_string() });
    }
    let get = |k: &str| meta.get(k).ok_or_else(|| perr(format!("missing key '{k}'")));
    let float = |k: &str| -> Result<f64> {
        get(k)?.parse().map_err(|_| perr(format!("bad value for '{k}'")))
    };
    let int = |k: &str| -> Result<usize> {
        get(k)?.parse().map_err(|_| perr(format!("bad value for '{k}'")))
    };
    let mode = Normalization::parse(get("mode")?).ok_or_else(|| perr("bad mode".into()))?;
    let meta = ProfileMeta {
        kind: get("kind")?.clone(),
        s: float("s")?,
        m: int("M")?,
        r_max: float("R_max")?,
        nu_p: float("nu_P")?,
        nu_q: float("nu_Q")?,
        residual: float("residual")?,
        iterations: int("iterations")?,
        mode,
    };

    let mut lines = rest.lines();
    if lines.next() != Some("r,U,V") {
        return Err(perr("missing 'r,U,V' header".into()));
    }
    let (mut r, mut u, mut v) = (Vec::new(), Vec::new(), Vec::new());
    for (i, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(perr(format!("row {} has {} columns", i + 1, cols.len())));
        }
        let num = |c: &str| c.parse::<f64>().map_err(|_| perr(format!("bad number '{c}' in row {}", i + 1)));
        r.push(num(cols[0])?);
        u.push(num(cols[1])?);
        v.push(num(cols[2])?);
    }
    if r.len() != meta.m {
        return Err(perr(format!("expected {} rows, found {}", meta.m, r.len())));
    }
    Ok(ProfileFile { meta, r, u, v })
}

pub fn read_profile(path: &Path) -> Result<ProfileFile> {
    let name = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::Parse {
        path: name.clone(),
        message: e.to_string(),
    })?;
    parse_profile(&name, &text)
}

/// Plain CSV table; cells are written verbatim.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render())?;
        Ok(())
    }
}

pub fn sweep_table(records: &[SweepRecord]) -> Table {
    let mut t = Table::new(&[
        "s", "nu_P", "nu_Q", "U_sup", "U_L2", "tail_U", "tail_V", "iterations", "residual",
    ]);
    for r in records {
        t.push(vec![
            format_float(r.s),
            format_float(r.nu_p),
            format_float(r.nu_q),
            format_float(r.u_sup),
            format_float(r.u_l2),
            format_float(r.tail_u),
            format_float(r.tail_v),
            r.iterations.to_string(),
            format_float(r.residual),
        ]);
    }
    t
}

pub fn spectrum_table(report: &SpectrumReport) -> Table {
    let mut t = Table::new(&["s", "k", "rank", "eigenvalue"]);
    for (k, i, mu) in report.rows() {
        t.push(vec![format_float(report.s), k.to_string(), i.to_string(), format_float(mu)]);
    }
    t
}

pub fn continuation_table(results: &[ContinuationResult]) -> Table {
    let mut t = Table::new(&[
        "s", "iterations", "residual", "omega_norm", "ball_ratio", "contraction", "agreement",
    ]);
    let opt = |x: Option<f64>| x.map(format_float).unwrap_or_default();
    for r in results {
        t.push(vec![
            format_float(r.s),
            r.iterations.to_string(),
            format_float(r.residual),
            format_float(r.omega_norm),
            opt(r.ball_ratio),
            format_float(r.contraction),
            opt(r.agreement),
        ]);
    }
    t
}
