//! Experiment output: grid data, fits, metadata, and their file forms.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::fitting::FitResult;
use crate::thermal::ThermalState;

use super::spec::{ControlPath, ExperimentKind};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitValue {
    pub value: f64,
    pub stderr: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub lower_bound: bool,
}

/// One noise-spectrum sample from a CPMG decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsdPoint {
    pub f_hz: f64,
    pub s: f64,
    pub n_pulses: u32,
    pub t_total: f64,
    pub chi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub kind: ExperimentKind,
    pub control_path: ControlPath,
    pub config_hash: String,
    pub seed: u64,
    pub shots: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thermal: Option<ThermalState>,
    pub white_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    /// Grid axes, outer first; points are stored row-major.
    pub axes: Vec<Axis>,
    pub p_blocked: Vec<f64>,
    /// Blocked outcomes per point.
    pub blocked: Vec<u64>,
    /// Shots per point.
    pub shot_counts: Vec<u64>,
    pub fit: BTreeMap<String, FitValue>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub psd: Vec<PsdPoint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub metadata: Metadata,
}

impl ExperimentResult {
    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.values.len()).collect()
    }

    pub fn fit_value(&self, key: &str) -> Option<f64> {
        self.fit.get(key).map(|f| f.value)
    }

    /// Row `i` of a two-axis grid.
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.axes.last().map_or(1, |a| a.values.len());
        &self.p_blocked[i * n..(i + 1) * n]
    }

    pub(crate) fn insert_fit(&mut self, prefix: &str, fit: &FitResult) {
        for (k, v) in &fit.params {
            let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            self.fit.insert(
                key,
                FitValue {
                    value: *v,
                    stderr: fit.stderr[k],
                    lower_bound: fit.is_lower_bound(k),
                },
            );
        }
    }

    pub fn header_comments(&self) -> Vec<String> {
        let m = &self.metadata;
        let mut out = vec![
            format!("cryospin {}", m.version),
            format!("kind={}", serde_json::to_value(m.kind).unwrap().as_str().unwrap_or("")),
            format!("config_hash={}", m.config_hash),
            format!("seed={}", m.seed),
        ];
        if let Some(t) = &m.thermal {
            out.push(format!(
                "power_w={} t_mxc_k={} t_e_k={}",
                t.p_total, t.t_mxc, t.t_e
            ));
        }
        out
    }

    /// One row per grid point: axis values, `p_blocked`, `blocked`, `shots`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for c in self.header_comments() {
            writeln!(w, "# {c}")?;
        }
        let mut cols: Vec<&str> = self.axes.iter().map(|a| a.name.as_str()).collect();
        cols.extend(["p_blocked", "blocked", "shots"]);
        writeln!(w, "{}", cols.join(","))?;
        let shape = self.shape();
        for (k, p) in self.p_blocked.iter().enumerate() {
            let mut rem = k;
            let mut idx = vec![0; shape.len()];
            for d in (0..shape.len()).rev() {
                idx[d] = rem % shape[d];
                rem /= shape[d];
            }
            let mut row: Vec<String> = idx
                .iter()
                .zip(&self.axes)
                .map(|(i, a)| a.values[*i].to_string())
                .collect();
            row.push(p.to_string());
            row.push(self.blocked[k].to_string());
            row.push(self.shot_counts[k].to_string());
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// CPMG spectrum as `f_hz,s_hz2_per_hz,n_pulses,t_total_s,chi`, sorted by frequency.
    pub fn write_psd_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for c in self.header_comments() {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "f_hz,s_hz2_per_hz,n_pulses,t_total_s,chi")?;
        for p in &self.psd {
            writeln!(w, "{},{},{},{},{}", p.f_hz, p.s, p.n_pulses, p.t_total, p.chi)?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)
    }
}
