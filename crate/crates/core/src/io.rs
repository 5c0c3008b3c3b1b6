//! File formats: instance JSON, sample sets (JSON and CSV) and edge lists.
//! Every writer goes through [`write_atomic`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{RunReport, TimeSource};
use crate::model::{Bitstring, Coef, Qubo};
use crate::planting::PlantedInstance;
use crate::samplers::{SampleRecord, SampleSet, SamplerParams};
use crate::topology::EdgeSet;

pub const FORMAT_VERSION: u32 = 1;

/// Writes to a temporary file in the target directory, then renames it over
/// `path`, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn num(v: f64) -> String {
    serde_json::to_string(&Coef(v)).expect("finite coefficients serialize")
}

/// On-disk form of a planted instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub format_version: u32,
    pub generator_version: String,
    pub seed: u64,
    pub num_vars: usize,
    pub planted: Bitstring,
    pub planted_energy: f64,
    pub offset: f64,
    /// Keyed by the decimal variable index.
    pub linear: BTreeMap<String, f64>,
    pub quadratic: Vec<(usize, usize, f64)>,
    pub edge_set_label: Option<String>,
    pub clause_count: usize,
    pub batch_size: usize,
    pub coefficient_pool: Vec<f64>,
    pub max_clauses: usize,
}

impl InstanceFile {
    pub fn from_instance(inst: &PlantedInstance) -> Self {
        let q = &inst.qubo;
        InstanceFile {
            format_version: FORMAT_VERSION,
            generator_version: inst.generator_version.clone(),
            seed: inst.seed,
            num_vars: q.num_vars(),
            planted: inst.planted.clone(),
            planted_energy: inst.planted_energy,
            offset: q.offset(),
            linear: q.linear().iter().map(|(&i, &c)| (i.to_string(), c)).collect(),
            quadratic: q.quadratic().iter().map(|(&(i, j), &c)| (i, j, c)).collect(),
            edge_set_label: inst.edge_set_label.clone(),
            clause_count: inst.clause_count(),
            batch_size: inst.batch_size,
            coefficient_pool: inst.coefficient_pool.clone(),
            max_clauses: inst.max_clauses,
        }
    }

    pub fn qubo(&self) -> Result<Qubo> {
        let mut lin = Vec::with_capacity(self.linear.len());
        for (k, &c) in &self.linear {
            let i: usize = k
                .parse()
                .map_err(|_| Error::Parse(format!("linear key {k:?} is not an index")))?;
            lin.push((i, c));
        }
        Qubo::from_terms(self.num_vars, lin, self.quadratic.iter().copied(), self.offset)
    }

    /// Human-diffable JSON: keys sorted, one term per line, integral values
    /// written as integers. Byte-identical for identical instances.
    pub fn to_json(&self) -> String {
        let mut s = String::from("{\n");
        let field = |s: &mut String, key: &str, value: String, last: bool| {
            let _ = writeln!(s, "  \"{key}\": {value}{}", if last { "" } else { "," });
        };
        let list = |items: Vec<String>| {
            if items.is_empty() {
                "[]".to_owned()
            } else {
                format!("[\n    {}\n  ]", items.join(",\n    "))
            }
        };
        let json = |v: &dyn erased::Json| v.json();
        field(&mut s, "batch_size", self.batch_size.to_string(), false);
        field(&mut s, "clause_count", self.clause_count.to_string(), false);
        let pool: Vec<String> = self.coefficient_pool.iter().map(|&c| num(c)).collect();
        field(&mut s, "coefficient_pool", format!("[{}]", pool.join(",")), false);
        field(&mut s, "edge_set_label", json(&self.edge_set_label), false);
        field(&mut s, "format_version", self.format_version.to_string(), false);
        field(&mut s, "generator_version", json(&self.generator_version), false);
        let lin: Vec<String> = self.linear.iter().map(|(k, &c)| format!("\"{k}\": {}", num(c))).collect();
        let lin = if lin.is_empty() {
            "{}".to_owned()
        } else {
            format!("{{\n    {}\n  }}", lin.join(",\n    "))
        };
        field(&mut s, "linear", lin, false);
        field(&mut s, "max_clauses", self.max_clauses.to_string(), false);
        field(&mut s, "num_vars", self.num_vars.to_string(), false);
        field(&mut s, "offset", num(self.offset), false);
        field(&mut s, "planted", json(&self.planted), false);
        field(&mut s, "planted_energy", num(self.planted_energy), false);
        let quad = self.quadratic.iter().map(|&(i, j, c)| format!("[{i},{j},{}]", num(c))).collect();
        field(&mut s, "quadratic", list(quad), false);
        field(&mut s, "seed", self.seed.to_string(), true);
        s.push_str("}\n");
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: InstanceFile = serde_json::from_str(text)?;
        if f.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported instance format version {}",
                f.format_version
            )));
        }
        f.planted.check_len(f.num_vars)?;
        Ok(f)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json().as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&read_text(path)?)
    }
}

mod erased {
    pub trait Json {
        fn json(&self) -> String;
    }

    impl<T: serde::Serialize> Json for T {
        fn json(&self) -> String {
            serde_json::to_string(self).expect("plain data serializes")
        }
    }
}

/// A sampler run on one instance, as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSetFile {
    pub format_version: u32,
    pub instance: String,
    /// Certified optimum the reads are judged against.
    pub planted_energy: Option<f64>,
    pub sampler: String,
    pub num_vars: usize,
    pub params: SamplerParams,
    /// Absent when the run was recorded for reproducibility, which keeps the
    /// file byte-identical across runs.
    pub wall_time_s: Option<f64>,
    pub work: u64,
    pub reads: Vec<ReadRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadRow {
    pub read_id: usize,
    pub energy: f64,
    pub bitstring: String,
}

impl SampleSetFile {
    pub fn new(
        instance: impl Into<String>,
        planted_energy: Option<f64>,
        s: &SampleSet,
        record_wall_time: bool,
    ) -> Self {
        SampleSetFile {
            format_version: FORMAT_VERSION,
            instance: instance.into(),
            planted_energy,
            sampler: s.sampler.clone(),
            num_vars: s.num_vars,
            params: s.params.clone(),
            wall_time_s: record_wall_time.then_some(s.wall_time_s),
            work: s.work,
            reads: s
                .records
                .iter()
                .map(|r| ReadRow {
                    read_id: r.read,
                    energy: r.energy,
                    bitstring: r.bits.to_hex(),
                })
                .collect(),
        }
    }

    pub fn to_sample_set(&self) -> Result<SampleSet> {
        let records = self
            .reads
            .iter()
            .map(|r| {
                Ok(SampleRecord {
                    read: r.read_id,
                    bits: Bitstring::from_hex(&r.bitstring, self.num_vars)?,
                    energy: r.energy,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SampleSet {
            sampler: self.sampler.clone(),
            num_vars: self.num_vars,
            records,
            wall_time_s: self.wall_time_s.unwrap_or(f64::NAN),
            work: self.work,
            params: self.params.clone(),
        })
    }

    /// GSP and TTS against the recorded planted energy.
    pub fn report(&self, time_source: TimeSource) -> Result<RunReport> {
        let ground = self.planted_energy.ok_or_else(|| {
            Error::Contract(format!("sample set for {:?} has no planted_energy", self.instance))
        })?;
        if time_source == TimeSource::Wall && self.wall_time_s.is_none() {
            return Err(Error::Contract(format!(
                "sample set for {:?} has no wall time; use the work time source",
                self.instance
            )));
        }
        RunReport::new(self.instance.clone(), &self.to_sample_set()?, ground, time_source)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("plain data serializes");
        s.push('\n');
        s
    }

    /// One row per read.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let seed = self.params.seed.to_string();
        w.write_record(SAMPLE_CSV_COLUMNS).expect("in-memory write");
        for r in &self.reads {
            w.write_record([
                r.read_id.to_string().as_str(),
                &num(r.energy),
                &r.bitstring,
                &self.sampler,
                &seed,
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8 fields")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: SampleSetFile = serde_json::from_str(text)?;
        if f.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported sample set format version {}",
                f.format_version
            )));
        }
        Ok(f)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&read_text(path)?)
    }
}

pub const SAMPLE_CSV_COLUMNS: [&str; 5] = ["read_id", "energy", "bitstring_hex", "sampler", "seed"];

#[derive(Deserialize)]
struct CsvRow {
    read_id: usize,
    energy: f64,
    bitstring_hex: String,
}

/// Parses the per-read CSV back into rows.
pub fn parse_sample_csv(text: &str) -> Result<Vec<ReadRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| Error::Parse(e.to_string()))?;
    if header.iter().ne(SAMPLE_CSV_COLUMNS) {
        return Err(Error::Parse(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize::<CsvRow>()
        .map(|row| {
            let row = row.map_err(|e| Error::Parse(e.to_string()))?;
            Ok(ReadRow {
                read_id: row.read_id,
                energy: row.energy,
                bitstring: row.bitstring_hex,
            })
        })
        .collect()
}

pub fn write_edge_list(path: &Path, e: &EdgeSet) -> Result<()> {
    write_atomic(path, e.to_edge_list().as_bytes())
}

/// Reads an edge list, labelling it with the file stem.
pub fn read_edge_list(path: &Path) -> Result<EdgeSet> {
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    EdgeSet::from_edge_list(&read_text(path)?, label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planting::{plant, PlantingConfig};
    use crate::samplers::simulated_annealing;
    use crate::topology::chimera;

    fn instance() -> PlantedInstance {
        let cfg = PlantingConfig::new("1011001110".parse().unwrap(), 11);
        plant(&cfg).unwrap()
    }

    #[test]
    fn instance_round_trip() {
        let inst = instance();
        let f = InstanceFile::from_instance(&inst);
        let text = f.to_json();
        let back = InstanceFile::from_json(&text).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.qubo().unwrap(), inst.qubo);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn instance_json_is_sorted_and_integral() {
        let text = InstanceFile::from_instance(&instance()).to_json();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        let positions: Vec<usize> = keys.iter().map(|k| text.find(&format!("\"{k}\":")).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        for pat in [".0,", ".0]", ".0\n"] {
            assert!(!text.contains(pat), "{pat:?} in output");
        }
        assert!(text.contains("\"planted\": [1,0,1,1,0,0,1,1,1,0]"));
    }

    #[test]
    fn rejects_wrong_version_and_length() {
        let text = InstanceFile::from_instance(&instance()).to_json();
        let v2 = text.replace("\"format_version\": 1", "\"format_version\": 9");
        assert!(InstanceFile::from_json(&v2).is_err());
        let short = text.replace("\"num_vars\": 10", "\"num_vars\": 9");
        assert!(InstanceFile::from_json(&short).is_err());
    }

    #[test]
    fn sample_set_round_trip() {
        let inst = instance();
        let p = SamplerParams {
            num_reads: 20,
            sweeps: 50,
            ..SamplerParams::default()
        };
        let s = simulated_annealing(&inst.qubo, &p).unwrap();
        let f = SampleSetFile::new("inst", Some(0.0), &s, false);
        let back = SampleSetFile::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
        let rebuilt = back.to_sample_set().unwrap();
        assert_eq!(rebuilt.records, s.records);
        let rows = parse_sample_csv(&f.to_csv()).unwrap();
        assert_eq!(rows, f.reads);
        assert!(f.report(TimeSource::Wall).is_err());
        let r = f.report(TimeSource::Work).unwrap();
        assert_eq!(r.num_reads, 20);
    }

    #[test]
    fn missing_planted_energy_is_contract_error() {
        let s = crate::samplers::exhaustive(&instance().qubo).unwrap();
        let f = SampleSetFile::new("x", None, &s, true);
        assert!(matches!(f.report(TimeSource::Wall), Err(Error::Contract(_))));
    }

    #[test]
    fn edge_list_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c2.edges");
        let e = chimera(2).unwrap();
        write_edge_list(&path, &e).unwrap();
        let back = read_edge_list(&path).unwrap();
        assert_eq!(back.num_vars(), 32);
        assert_eq!(back.edges().collect::<Vec<_>>(), e.edges().collect::<Vec<_>>());
        assert_eq!(back.label(), "c2");
    }
}
