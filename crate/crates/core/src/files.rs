//! On-disk formats: configuration documents, line-oriented traces, and run
//! metrics. Every format starts with a `format` name and a `version`.

use crate::engine::{AmoebotId, EngineError, System};
use crate::geometry::{Dim, NodePos, Orientation};
use crate::scheduler::{Mode, PolicyKind, Trace, TraceEvent, TraceHeader, TraceSummary, TRACE_FORMAT, TRACE_VERSION};
use crate::topology::{self, BettiNumbers};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use thiserror::Error;

pub const CONFIG_FORMAT: &str = "amoebot-config";
pub const CONFIG_VERSION: u32 = 1;
pub const METRICS_FORMAT: &str = "amoebot-metrics";
pub const METRICS_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("expected format '{expected}' version {version}, found '{found}' version {found_version}")]
    Format { expected: &'static str, version: u32, found: String, found_version: u32 },
    #[error("trace: {0}")]
    Trace(String),
    #[error("{count} orientations listed for {n} nodes")]
    OrientationCount { count: usize, n: usize },
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("configuration is not connected")]
    Disconnected,
    #[error("configuration is not contractible (betti {0:?})")]
    NotContractible(BettiNumbers),
    #[error(transparent)]
    Topology(#[from] topology::TopologyError),
}

/// How amoebots are oriented.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientations {
    /// Every amoebot uses the reference frame.
    Identity,
    /// Uniform over the orientations available in the dimension.
    Randomize { seed: u64 },
    /// One orientation index per node, in node order.
    Explicit(Vec<u8>),
}

impl Orientations {
    pub fn resolve(&self, dim: Dim, n: usize) -> Result<Vec<Orientation>, FileError> {
        let available: Vec<Orientation> = dim.orientations().collect();
        match self {
            Orientations::Identity => Ok(vec![Orientation::IDENTITY; n]),
            Orientations::Randomize { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok((0..n).map(|_| available[rng.gen_range(0..available.len())]).collect())
            }
            Orientations::Explicit(v) => {
                if v.len() != n {
                    return Err(FileError::OrientationCount { count: v.len(), n });
                }
                v.iter().map(|&i| Ok(Orientation::from_index(i as usize)?)).collect()
            }
        }
    }
}

/// A starting configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Configuration {
    pub format: String,
    pub version: u32,
    pub dim: Dim,
    pub orientations: Orientations,
    pub nodes: Vec<NodePos>,
}

impl Configuration {
    pub fn new(dim: Dim, nodes: Vec<NodePos>, orientations: Orientations) -> Self {
        Self { format: CONFIG_FORMAT.into(), version: CONFIG_VERSION, dim, orientations, nodes }
    }

    /// Build the runtime system; node `i` becomes amoebot `i`.
    pub fn to_system(&self) -> Result<System, FileError> {
        let o = self.orientations.resolve(self.dim, self.nodes.len())?;
        let pairs: Vec<_> = self.nodes.iter().copied().zip(o).collect();
        Ok(System::new(self.dim, &pairs)?)
    }

    /// Connected and contractible.
    pub fn check_topology(&self) -> Result<(), FileError> {
        if !topology::is_connected(self.dim, &self.nodes) {
            return Err(FileError::Disconnected);
        }
        let b = topology::betti(&topology::build_dual_complex(self.dim, &self.nodes)?);
        if !b.is_contractible() {
            return Err(FileError::NotContractible(b));
        }
        Ok(())
    }

    /// One header line, then one node per line.
    pub fn to_json(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "{{\"format\":{},\"version\":{},\"dim\":{},\"orientations\":{},\n \"nodes\":[",
            serde_json::to_string(&self.format).expect("string"),
            self.version,
            serde_json::to_string(&self.dim).expect("dim"),
            serde_json::to_string(&self.orientations).expect("orientations"),
        ));
        for (i, p) in self.nodes.iter().enumerate() {
            let [x, y, z] = p.to_array();
            s.push_str(if i == 0 { "\n  " } else { ",\n  " });
            s.push_str(&format!("[{x},{y},{z}]"));
        }
        s.push_str("\n ]}\n");
        s
    }

    /// Parse and validate format, version and geometry. Topology is
    /// checked unless `allow_invalid` is set.
    pub fn from_json(text: &str, allow_invalid: bool) -> Result<Self, FileError> {
        let c: Configuration = serde_json::from_str(text).map_err(|source| FileError::Json { line: 1, source })?;
        if c.format != CONFIG_FORMAT || c.version != CONFIG_VERSION {
            return Err(FileError::Format {
                expected: CONFIG_FORMAT,
                version: CONFIG_VERSION,
                found: c.format,
                found_version: c.version,
            });
        }
        for &p in &c.nodes {
            c.dim.validate(p)?;
        }
        // Duplicates and orientation errors surface here.
        c.to_system()?;
        if !allow_invalid {
            c.check_topology()?;
        }
        Ok(c)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum TraceRecord {
    Header(TraceHeader),
    Event(TraceEvent),
    Summary(TraceSummary),
}

/// Write a trace as JSON lines: header, events, summary.
pub fn write_trace(mut w: impl Write, trace: &Trace) -> Result<(), FileError> {
    let line = |w: &mut dyn Write, r: &TraceRecord| -> Result<(), FileError> {
        serde_json::to_writer(&mut *w, r).map_err(|source| FileError::Json { line: 0, source })?;
        w.write_all(b"\n")?;
        Ok(())
    };
    line(&mut w, &TraceRecord::Header(trace.header.clone()))?;
    for e in &trace.events {
        line(&mut w, &TraceRecord::Event(e.clone()))?;
    }
    line(&mut w, &TraceRecord::Summary(trace.summary.clone()))?;
    w.flush()?;
    Ok(())
}

pub fn trace_to_string(trace: &Trace) -> String {
    let mut buf = Vec::new();
    write_trace(&mut buf, trace).expect("writing to memory");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn read_trace(r: impl BufRead) -> Result<Trace, FileError> {
    let mut header = None;
    let mut events = Vec::new();
    let mut summary = None;
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TraceRecord = serde_json::from_str(&line).map_err(|source| FileError::Json { line: i + 1, source })?;
        match rec {
            TraceRecord::Header(h) if header.is_none() && i == 0 => {
                if h.format != TRACE_FORMAT || h.version != TRACE_VERSION {
                    return Err(FileError::Format {
                        expected: TRACE_FORMAT,
                        version: TRACE_VERSION,
                        found: h.format,
                        found_version: h.version,
                    });
                }
                header = Some(h);
            }
            TraceRecord::Header(_) => return Err(FileError::Trace(format!("line {}: unexpected header", i + 1))),
            _ if header.is_none() => return Err(FileError::Trace("first record is not a header".into())),
            _ if summary.is_some() => return Err(FileError::Trace(format!("line {}: record after summary", i + 1))),
            TraceRecord::Event(e) => events.push(e),
            TraceRecord::Summary(s) => summary = Some(s),
        }
    }
    let header = header.ok_or_else(|| FileError::Trace("empty trace".into()))?;
    let summary = summary.ok_or_else(|| FileError::Trace("missing summary record".into()))?;
    Ok(Trace { header, events, summary })
}

/// Per-run metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub format: String,
    pub version: u32,
    pub n: usize,
    pub rounds: u64,
    pub erosions: u64,
    pub leader: Option<AmoebotId>,
    pub policy: PolicyKind,
    pub seed: u64,
    pub mode: Mode,
    pub dim: Dim,
    pub rule_counts: [u64; 3],
    pub actions: u64,
    pub violations: usize,
    pub success: bool,
    pub wall_time_ms: f64,
}

impl RunMetrics {
    pub fn from_trace(trace: &Trace, wall_time_ms: f64) -> Self {
        let s = &trace.summary;
        Self {
            format: METRICS_FORMAT.into(),
            version: METRICS_VERSION,
            n: trace.header.n,
            rounds: s.rounds,
            erosions: s.erosions,
            leader: s.leader,
            policy: trace.header.policy,
            seed: trace.header.seed,
            mode: trace.header.mode,
            dim: trace.header.dim,
            rule_counts: s.rule_counts,
            actions: s.actions,
            violations: s.violations.len(),
            success: trace.succeeded(),
            wall_time_ms,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("metrics serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, FileError> {
        let m: RunMetrics = serde_json::from_str(text).map_err(|source| FileError::Json { line: 1, source })?;
        if m.format != METRICS_FORMAT || m.version != METRICS_VERSION {
            return Err(FileError::Format {
                expected: METRICS_FORMAT,
                version: METRICS_VERSION,
                found: m.format,
                found_version: m.version,
            });
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_layout() {
        let c = Configuration::new(
            Dim::Three,
            vec![NodePos::ORIGIN, NodePos::new(1, 1, 0)],
            Orientations::Randomize { seed: 7 },
        );
        let text = c.to_json();
        assert_eq!(text.lines().count(), 5);
        assert_eq!(Configuration::from_json(&text, false).unwrap(), c);
        let e = Configuration::new(Dim::Two, vec![NodePos::ORIGIN], Orientations::Explicit(vec![3]));
        assert_eq!(Configuration::from_json(&e.to_json(), false).unwrap(), e);
    }

    #[test]
    fn config_rejections() {
        let bad_version = r#"{"format":"amoebot-config","version":2,"dim":"3d","orientations":"identity","nodes":[[0,0,0]]}"#;
        assert!(matches!(Configuration::from_json(bad_version, false), Err(FileError::Format { .. })));
        let parity = r#"{"format":"amoebot-config","version":1,"dim":"3d","orientations":"identity","nodes":[[1,0,0]]}"#;
        assert!(matches!(Configuration::from_json(parity, false), Err(FileError::Geometry(_))));
        let apart = r#"{"format":"amoebot-config","version":1,"dim":"3d","orientations":"identity","nodes":[[0,0,0],[4,0,0]]}"#;
        assert!(matches!(Configuration::from_json(apart, false), Err(FileError::Disconnected)));
        assert!(Configuration::from_json(apart, true).is_ok());
        let count = r#"{"format":"amoebot-config","version":1,"dim":"3d","orientations":{"explicit":[0,1]},"nodes":[[0,0,0]]}"#;
        assert!(matches!(Configuration::from_json(count, false), Err(FileError::OrientationCount { .. })));
    }

    #[test]
    fn randomized_orientations_stay_in_dimension() {
        let o = Orientations::Randomize { seed: 3 }.resolve(Dim::Two, 200).unwrap();
        assert!(o.iter().all(|x| x.index() < 6));
        let o3 = Orientations::Randomize { seed: 3 }.resolve(Dim::Three, 200).unwrap();
        assert!(o3.iter().any(|x| x.index() >= 6));
    }

    #[test]
    fn trace_reader_rejects_malformed_files() {
        assert!(read_trace("".as_bytes()).is_err());
        let ev = r#"{"record":"event","step":0,"amoebot":0,"action":"setup","round":0,"ops":[]}"#;
        assert!(matches!(read_trace(ev.as_bytes()), Err(FileError::Trace(_))));
    }
}
