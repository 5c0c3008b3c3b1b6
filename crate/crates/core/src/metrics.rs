//! Ground-state success probability and time-to-solution.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::samplers::SampleSet;

/// Reads whose energy equals `ground_energy` exactly.
pub fn success_count(s: &SampleSet, ground_energy: f64) -> usize {
    s.records.iter().filter(|r| r.energy == ground_energy).count()
}

/// Fraction of reads at the certified ground energy.
pub fn gsp(s: &SampleSet, ground_energy: f64) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::Contract("GSP of an empty sample set".into()));
    }
    Ok(success_count(s, ground_energy) as f64 / s.len() as f64)
}

/// Expected time to see the ground state at least once with 99% confidence,
/// `(t / A) ln(0.01) / ln(1 - p)`.
///
/// By convention the value is `t / A` when `p = 1` and undefined (`None`)
/// when `p = 0`.
pub fn tts99(total_time_s: f64, reads: usize, p: f64) -> Result<Option<f64>> {
    if !(total_time_s > 0.0 && total_time_s.is_finite()) {
        return Err(Error::Contract(format!(
            "total time {total_time_s} must be positive"
        )));
    }
    if reads == 0 {
        return Err(Error::Contract("number of reads must be positive".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Contract(format!("success probability {p} outside [0, 1]")));
    }
    let per_read = total_time_s / reads as f64;
    Ok(if p == 0.0 {
        None
    } else if p == 1.0 {
        Some(per_read)
    } else {
        Some(per_read * 0.01f64.ln() / (1.0 - p).ln())
    })
}

/// Where a report's time figures come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeSource {
    /// Measured wall-clock time of the sampler.
    #[default]
    Wall,
    /// The sampler's deterministic work count at one nanosecond per
    /// evaluation. Reproducible byte for byte, unlike wall time.
    Work,
}

impl TimeSource {
    pub const SECONDS_PER_WORK_UNIT: f64 = 1e-9;

    pub fn seconds(self, s: &SampleSet) -> f64 {
        match self {
            TimeSource::Wall => s.wall_time_s,
            TimeSource::Work => s.work as f64 * Self::SECONDS_PER_WORK_UNIT,
        }
    }
}

impl fmt::Display for TimeSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimeSource::Wall => "wall",
            TimeSource::Work => "work",
        })
    }
}

impl FromStr for TimeSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wall" => Ok(TimeSource::Wall),
            "work" => Ok(TimeSource::Work),
            other => Err(Error::Parse(format!("unknown time source {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance: String,
    pub sampler: String,
    pub num_reads: usize,
    pub ground_energy: f64,
    pub success_count: usize,
    pub gsp: f64,
    pub tts_99: Option<f64>,
    pub total_time_s: f64,
    pub time_source: TimeSource,
}

impl RunReport {
    pub fn new(
        instance: impl Into<String>,
        s: &SampleSet,
        ground_energy: f64,
        time_source: TimeSource,
    ) -> Result<Self> {
        let p = gsp(s, ground_energy)?;
        let total = time_source.seconds(s);
        // a zero-duration run (e.g. a trivially small instance timed by work
        // units) still has a per-read cost floor of one unit
        let total = total.max(TimeSource::SECONDS_PER_WORK_UNIT);
        Ok(RunReport {
            instance: instance.into(),
            sampler: s.sampler.clone(),
            num_reads: s.len(),
            ground_energy,
            success_count: success_count(s, ground_energy),
            gsp: p,
            tts_99: tts99(total, s.len(), p)?,
            total_time_s: total,
            time_source,
        })
    }

    pub const CSV_COLUMNS: [&'static str; 7] =
        ["instance", "sampler", "A", "p", "tts_99", "total_time_s", "time_source"];

    fn csv_record(&self) -> [String; 7] {
        [
            self.instance.clone(),
            self.sampler.clone(),
            self.num_reads.to_string(),
            self.gsp.to_string(),
            self.tts_99.map(|t| t.to_string()).unwrap_or_default(),
            self.total_time_s.to_string(),
            self.time_source.to_string(),
        ]
    }
}

/// Report table sorted by `(instance, sampler)`, header first.
pub fn reports_to_csv(reports: &[RunReport]) -> String {
    let mut sorted: Vec<&RunReport> = reports.iter().collect();
    sorted.sort_by(|a, b| (&a.instance, &a.sampler).cmp(&(&b.instance, &b.sampler)));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RunReport::CSV_COLUMNS).expect("in-memory write");
    for r in sorted {
        w.write_record(r.csv_record()).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8 fields")
}
