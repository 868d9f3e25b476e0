//! Append-only checkpoint files.
//!
//! One JSON object per line. The first line is a header carrying the event,
//! the master seed, the interval quantile and the crate version; each
//! further line is one attempted trial, in index order starting at 0.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{reached_target, run_batches, sample_tiling, trial_streams, Estimate, TrialPlan};
use crate::error::{Error, Result};
use crate::events::EventSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Header {
    kind: String,
    spec: EventSpec,
    master_seed: u64,
    z: f64,
    version: String,
}

/// One attempted trial. `outcome` is `None` for a trial abandoned by the
/// determinism certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub outcome: Option<bool>,
    pub streams: Vec<String>,
}

struct Loaded {
    header: Option<Header>,
    records: Vec<TrialRecord>,
}

impl Loaded {
    fn counts(&self) -> (u64, u64, u64) {
        let mut c = (0, 0, 0);
        for r in &self.records {
            match r.outcome {
                Some(hit) => {
                    c.1 += 1;
                    c.0 += hit as u64;
                }
                None => c.2 += 1,
            }
        }
        c
    }
}

fn load(path: &Path) -> Result<Loaded> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(e.into()),
    };
    let mut out = Loaded {
        header: None,
        records: Vec::new(),
    };
    if text.is_empty() {
        return Ok(out);
    }
    let lines: Vec<&str> = text.split_terminator('\n').collect();
    if !text.ends_with('\n') {
        return Err(Error::Checkpoint {
            line: lines.len(),
            message: "truncated record (no line terminator)".into(),
        });
    }
    for (i, line) in lines.iter().enumerate() {
        let lineno = i + 1;
        let bad = |message: String| Error::Checkpoint { line: lineno, message };
        if i == 0 {
            let h: Header = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
            if h.kind != "header" {
                return Err(bad(format!("expected a header record, found kind {:?}", h.kind)));
            }
            out.header = Some(h);
            continue;
        }
        let r: TrialRecord = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        let expected = out.records.len() as u64;
        if r.trial_index != expected {
            return Err(bad(format!("trial index {} where {expected} was expected", r.trial_index)));
        }
        out.records.push(r);
    }
    Ok(out)
}

/// The estimate stored in a checkpoint file.
pub fn resume(path: impl AsRef<Path>) -> Result<Estimate> {
    let loaded = load(path.as_ref())?;
    let Some(h) = &loaded.header else {
        return Err(Error::Checkpoint {
            line: 1,
            message: "missing header".into(),
        });
    };
    let (k, n, aborted) = loaded.counts();
    Estimate::from_counts(h.spec, k, n, h.z, h.master_seed, aborted)
}

/// [`run_trials`](super::run_trials) with every attempted trial appended to
/// `path`. An existing file for the same event and seed is continued from
/// its next trial index; the result equals an uninterrupted run. A missing
/// or empty file starts a fresh run.
pub fn run_checkpointed(spec: &EventSpec, plan: &TrialPlan, master_seed: u64, path: impl AsRef<Path>) -> Result<Estimate> {
    spec.validate()?;
    plan.validate()?;
    let path = path.as_ref();
    let loaded = load(path)?;
    match &loaded.header {
        Some(h) => {
            if h.spec != *spec || h.master_seed != master_seed || h.z != plan.z {
                return Err(Error::CheckpointMismatch(format!(
                    "file has {} with seed {} and z {}, run has {} with seed {master_seed} and z {}",
                    h.spec.label(),
                    h.master_seed,
                    h.z,
                    spec.label(),
                    plan.z
                )));
            }
        }
        None => {
            let h = Header {
                kind: "header".into(),
                spec: *spec,
                master_seed,
                z: plan.z,
                version: crate::VERSION.into(),
            };
            let mut f = File::create(path)?;
            writeln!(f, "{}", serde_json::to_string(&h)?)?;
            f.sync_data()?;
        }
    }
    let (mut k, mut n, mut aborted) = loaded.counts();
    let start = loaded.records.len() as u64;
    let done = start > 0 && start.is_multiple_of(super::CHECK_EVERY) && reached_target(k, n, plan);
    if !done && start < plan.n_max {
        let window = spec.window()?;
        let mut out = BufWriter::new(OpenOptions::new().append(true).open(path)?);
        run_batches(
            plan,
            start,
            aborted,
            |i| {
                let t = sample_tiling(window, spec.p, spec.intensity, master_seed, i, &plan.padding);
                match t {
                    Ok(t) => Ok((spec.evaluate(&t)?, trial_streams(&t, master_seed, i))),
                    Err(e) => Err(e),
                }
            },
            |first, batch, at_check| {
                for (j, a) in batch.into_iter().enumerate() {
                    let trial_index = first + j as u64;
                    let rec = match a {
                        Some((hit, streams)) => {
                            n += 1;
                            k += hit as u64;
                            TrialRecord {
                                trial_index,
                                outcome: Some(hit),
                                streams: streams.iter().map(ToString::to_string).collect(),
                            }
                        }
                        None => {
                            aborted += 1;
                            let mut streams = vec![format!("{master_seed}/{trial_index}/positions")];
                            streams.extend(
                                (0..plan.padding.max_shells).map(|k| format!("{master_seed}/{trial_index}/shell{k}")),
                            );
                            TrialRecord {
                                trial_index,
                                outcome: None,
                                streams,
                            }
                        }
                    };
                    writeln!(out, "{}", serde_json::to_string(&rec)?)?;
                }
                out.flush()?;
                Ok(at_check && reached_target(k, n, plan))
            },
        )?;
        out.into_inner().map_err(|e| e.into_error())?.sync_data()?;
    }
    Estimate::from_counts(*spec, k, n, plan.z, master_seed, aborted)
}
