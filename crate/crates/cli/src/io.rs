//! Instance and trace files.
//!
//! Numbers are written with 17 significant digits so every finite double
//! survives a write/read cycle unchanged.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use subgrad_core::{
    AffinePiece, FeasTrace, FeasibilityInstance, PiecewiseAffine, PiecewiseAffineOracle,
    ProjectableSet, RunTrace, StepRecord,
};

use crate::CliError;

#[derive(Debug, Clone, Copy, Default)]
struct SeventeenDigits;

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Compact JSON with 17-significant-digit numbers.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SeventeenDigits);
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Usage(format!("cannot serialize: {e}")))?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("cannot parse {}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    PiecewiseAffine,
    Feasibility,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceFile {
    pub slope: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SetFile {
    Hyperplane {
        a: Vec<f64>,
        b: f64,
    },
    /// `<a, x> <= b`
    Halfspace {
        a: Vec<f64>,
        b: f64,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
}

impl SetFile {
    pub fn to_set(&self) -> Result<ProjectableSet, CliError> {
        Ok(match self {
            SetFile::Hyperplane { a, b } => ProjectableSet::hyperplane(a.clone(), *b)?,
            SetFile::Halfspace { a, b } => ProjectableSet::halfspace(a.clone(), *b)?,
            SetFile::Ball { center, radius } => ProjectableSet::ball(center.clone(), *radius)?,
        })
    }

    pub fn from_set(set: &ProjectableSet) -> Option<Self> {
        match set {
            ProjectableSet::WholeSpace => None,
            ProjectableSet::Hyperplane { normal, offset } => Some(SetFile::Hyperplane {
                a: normal.clone(),
                b: *offset,
            }),
            ProjectableSet::Halfspace { normal, offset } => Some(SetFile::Halfspace {
                a: normal.clone(),
                b: *offset,
            }),
            ProjectableSet::Ball { center, radius } => Some(SetFile::Ball {
                center: center.clone(),
                radius: *radius,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub kind: InstanceKind,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pieces: Vec<PieceFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sets: Vec<SetFile>,
    pub x1: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_star: Option<f64>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_star: Option<Vec<f64>>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
}

impl InstanceFile {
    pub fn piecewise_affine(function: &PiecewiseAffine, x1: &[f64]) -> Self {
        InstanceFile {
            kind: InstanceKind::PiecewiseAffine,
            dimension: function.dimension(),
            pieces: function
                .pieces()
                .iter()
                .map(|p| PieceFile {
                    slope: p.slope.clone(),
                    offset: p.offset,
                })
                .collect(),
            sets: Vec::new(),
            x1: x1.to_vec(),
            f_star: None,
            b: None,
            x_star: None,
            r: None,
        }
    }

    pub fn feasibility(inst: &FeasibilityInstance) -> Self {
        InstanceFile {
            kind: InstanceKind::Feasibility,
            dimension: inst.dimension(),
            pieces: Vec::new(),
            sets: inst.sets.iter().filter_map(SetFile::from_set).collect(),
            x1: inst.x1.clone(),
            f_star: None,
            b: None,
            x_star: inst.known_solution.clone(),
            r: inst.radius,
        }
    }

    fn expect_kind(&self, kind: InstanceKind) -> Result<(), CliError> {
        if self.kind != kind {
            return Err(CliError::Usage(format!(
                "instance kind is {:?}, expected {kind:?}",
                self.kind
            )));
        }
        if self.x1.len() != self.dimension {
            return Err(CliError::Usage(format!(
                "x1 has length {}, dimension is {}",
                self.x1.len(),
                self.dimension
            )));
        }
        Ok(())
    }

    pub fn function(&self) -> Result<PiecewiseAffine, CliError> {
        self.expect_kind(InstanceKind::PiecewiseAffine)?;
        let pieces = self
            .pieces
            .iter()
            .map(|p| AffinePiece::new(p.slope.clone(), p.offset))
            .collect();
        Ok(PiecewiseAffine::new(self.dimension, pieces)?)
    }

    /// Oracle carrying whichever of `f_star` and `B` the file declares.
    pub fn oracle(&self) -> Result<PiecewiseAffineOracle, CliError> {
        let mut oracle = PiecewiseAffineOracle::new(self.function()?);
        if let Some(f_star) = self.f_star {
            oracle = oracle.with_optimal_value(f_star);
        }
        if let Some(b) = self.b {
            oracle = oracle.with_subgradient_bound(b);
        }
        Ok(oracle)
    }

    pub fn feasibility_instance(&self) -> Result<FeasibilityInstance, CliError> {
        self.expect_kind(InstanceKind::Feasibility)?;
        let sets = self
            .sets
            .iter()
            .map(SetFile::to_set)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FeasibilityInstance::new(
            sets,
            self.x1.clone(),
            self.x_star.clone(),
            self.r,
        )?)
    }

    /// The declared `R`, else `‖x1 − x_star‖` when `x_star` is given.
    pub fn radius(&self) -> Option<f64> {
        self.r.or_else(|| {
            self.x_star
                .as_ref()
                .map(|s| subgrad_core::linalg::distance(&self.x1, s))
        })
    }
}

/// One line of a subgradient-method trace; the last line has no `g`, `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceLine {
    pub k: usize,
    pub x: Vec<f64>,
    pub f: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasTraceLine {
    pub k: usize,
    pub x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    pub distance: f64,
}

fn join_lines<T: Serialize>(lines: impl IntoIterator<Item = T>) -> Result<String, CliError> {
    let mut out = String::new();
    for line in lines {
        out.push_str(&to_json(&line)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn run_trace_jsonl(trace: &RunTrace) -> Result<String, CliError> {
    let steps = trace.records.iter().map(|r| TraceLine {
        k: r.k,
        x: r.x.clone(),
        f: r.f,
        g: Some(r.g.clone()),
        h: Some(r.h),
    });
    let last = TraceLine {
        k: trace.len() + 1,
        x: trace.final_x.clone(),
        f: trace.final_f,
        g: None,
        h: None,
    };
    join_lines(steps.chain(std::iter::once(last)))
}

pub fn feas_trace_jsonl(trace: &FeasTrace) -> Result<String, CliError> {
    let steps = trace.records.iter().map(|r| FeasTraceLine {
        k: r.k,
        x: r.x.clone(),
        index: Some(r.index),
        distance: r.distance,
    });
    let last = FeasTraceLine {
        k: trace.records.len() + 1,
        x: trace.final_x.clone(),
        index: None,
        distance: trace.final_distance,
    };
    join_lines(steps.chain(std::iter::once(last)))
}

/// Rebuilds a [`RunTrace`] from its JSON-lines form.
pub fn parse_run_trace(text: &str) -> Result<RunTrace, CliError> {
    let lines: Vec<TraceLine> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| CliError::Usage(format!("trace line {}: {e}", i + 1)))
        })
        .collect::<Result<_, _>>()?;
    let Some((last, steps)) = lines.split_last() else {
        return Err(CliError::Usage("trace is empty".into()));
    };
    let mut records = Vec::with_capacity(steps.len());
    for (i, line) in steps.iter().enumerate() {
        if line.k != i + 1 {
            return Err(CliError::Usage(format!(
                "trace line {} has k = {}",
                i + 1,
                line.k
            )));
        }
        let (Some(g), Some(h)) = (&line.g, line.h) else {
            return Err(CliError::Usage(format!(
                "trace line {} lacks g or h",
                i + 1
            )));
        };
        records.push(StepRecord {
            k: line.k,
            x: line.x.clone(),
            f: line.f,
            g: g.clone(),
            h,
            momentum: None,
        });
    }
    if last.k != steps.len() + 1 {
        return Err(CliError::Usage(format!(
            "final trace line has k = {}",
            last.k
        )));
    }
    Ok(RunTrace {
        records,
        final_x: last.x.clone(),
        final_f: last.f,
    })
}
