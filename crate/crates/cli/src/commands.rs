use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use posiform::io::{read_edge_list, write_atomic, InstanceFile, SampleSetFile};
use posiform::metrics::{reports_to_csv, TimeSource};
use posiform::model::brute_force_with_cap;
use posiform::planting::{plant as plant_instance, random_planted, PlantingConfig};
use posiform::rng::derive_seed;
use posiform::samplers::{
    exhaustive_with_cap, simulated_annealing, steepest_descent, SampleSet, SamplerParams,
};
use posiform::topology::{
    apply_defects, chimera_graph, complete, hardware_profile, pegasus, random_graph, zephyr,
    EdgeSet, HARDWARE_PROFILES,
};
use posiform::Bitstring;
use rayon::prelude::*;

use crate::{
    EvalArgs, Failure, GraphArgs, GraphKind, PlantArgs, Sampler, SolveArgs, StatsArgs, VerifyArgs,
};

type CmdResult = Result<(), Failure>;

/// Stream of the per-instance seed that draws a random planted bitstring.
const PLANTED_STREAM: u64 = 0x706c_616e_7465_64;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn emit(out: Option<&Path>, text: &str) -> CmdResult {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()).map_err(Failure::from),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Failed(e.to_string())),
    }
}

fn file_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn unknown_chip(chip: &str) -> Failure {
    let known: Vec<&str> = HARDWARE_PROFILES.iter().map(|p| p.chip).collect();
    usage(format!("unknown chip {chip:?}; known: {}", known.join(", ")))
}

fn build_graph(kind: &GraphKind, seed: u64) -> Result<EdgeSet, Failure> {
    Ok(match kind {
        GraphKind::Chimera { m, tile } => chimera_graph(*m, *m, *tile)?,
        GraphKind::Pegasus { m } => pegasus(*m)?,
        GraphKind::Zephyr { m, tile } => zephyr(*m, *tile)?,
        GraphKind::Complete { n } => complete(*n),
        GraphKind::Random { n, density } => random_graph(*n, *density, seed)?,
        GraphKind::Hardware { chip } => hardware_profile(chip).ok_or_else(|| unknown_chip(chip))?.graph(seed)?,
    })
}

fn describe(e: &EdgeSet) -> String {
    format!(
        "{}: {} nodes ({} active), {} edges",
        e.label(),
        e.num_vars(),
        e.active_nodes(),
        e.num_edges()
    )
}

pub fn graph(a: GraphArgs) -> CmdResult {
    let mut e = build_graph(&a.kind, a.seed)?;
    if a.defect_nodes > 0 || a.defect_edges > 0 {
        e = apply_defects(&e, a.defect_nodes, a.defect_edges, derive_seed(a.seed, 1))?;
    }
    emit(a.out.as_deref(), &e.to_edge_list())?;
    if a.out.is_some() {
        println!("{}", describe(&e));
    } else {
        eprintln!("{}", describe(&e));
    }
    Ok(())
}

/// `--topology` values such as `chimera:4` or `hardware:DW_2000Q_6`.
struct TopologySpec(GraphKind);

impl FromStr for TopologySpec {
    type Err = Failure;

    fn from_str(s: &str) -> Result<Self, Failure> {
        let parts: Vec<&str> = s.split(':').collect();
        let int = |k: usize| -> Result<usize, Failure> {
            parts
                .get(k)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| usage(format!("topology {s:?}: expected an integer in field {k}")))
        };
        let kind = match (parts[0], parts.len()) {
            ("chimera", 2) => GraphKind::Chimera { m: int(1)?, tile: 4 },
            ("pegasus", 2) => GraphKind::Pegasus { m: int(1)? },
            ("zephyr", 2) => GraphKind::Zephyr { m: int(1)?, tile: 4 },
            ("complete", 2) => GraphKind::Complete { n: int(1)? },
            ("random", 3) => GraphKind::Random {
                n: int(1)?,
                density: parts[2]
                    .parse()
                    .map_err(|_| usage(format!("topology {s:?}: bad density")))?,
            },
            ("hardware", 2) => GraphKind::Hardware { chip: parts[1].to_owned() },
            _ => {
                return Err(usage(format!(
                    "unrecognised topology {s:?}; use chimera:M, pegasus:M, zephyr:M, \
                     complete:N, random:N:P or hardware:CHIP"
                )))
            }
        };
        Ok(TopologySpec(kind))
    }
}

enum PlantedChoice {
    Random,
    Fixed(Bitstring),
}

fn planted_choice(arg: &str) -> Result<PlantedChoice, Failure> {
    if arg == "random" {
        return Ok(PlantedChoice::Random);
    }
    let text = match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| usage(format!("{path}: {e}")))?,
        None => arg.to_owned(),
    };
    let bits: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    bits.parse()
        .map(PlantedChoice::Fixed)
        .map_err(|e: posiform::Error| usage(format!("--planted: {e}")))
}

pub fn plant(a: PlantArgs) -> CmdResult {
    let mut batch = a.batch_size;
    let edge_set = match (a.num_vars, &a.graph, &a.topology) {
        (Some(_), _, _) => None,
        (None, Some(path), _) => Some(read_edge_list(path)?),
        (None, None, Some(spec)) => {
            let TopologySpec(kind) = spec.parse()?;
            if let GraphKind::Hardware { chip } = &kind {
                let profile = hardware_profile(chip).ok_or_else(|| unknown_chip(chip))?;
                batch = batch.or(Some(profile.batch_size));
            }
            Some(build_graph(&kind, a.seed)?)
        }
        (None, None, None) => return Err(usage("one of -n, --graph or --topology is required")),
    };
    if a.count == 0 {
        return Err(usage("--count must be at least 1"));
    }
    fs::create_dir_all(&a.out_dir).map_err(|e| Failure::Failed(format!("{}: {e}", a.out_dir.display())))?;

    let edge_set = match edge_set {
        Some(e) if a.compact => {
            let (compacted, original) = e.compact();
            let mut map = String::new();
            for v in original {
                let _ = writeln!(map, "{v}");
            }
            write_atomic(&a.out_dir.join(format!("{}.nodes", a.prefix)), map.as_bytes())?;
            Some(compacted)
        }
        other => other,
    };
    let n = match (&edge_set, a.num_vars) {
        (Some(e), _) => e.num_vars(),
        (None, Some(n)) => n,
        (None, None) => unreachable!("checked above"),
    };
    let choice = planted_choice(&a.planted)?;
    if let PlantedChoice::Fixed(b) = &choice {
        if b.len() != n {
            return Err(usage(format!("--planted has {} bits but the instance has {n} variables", b.len())));
        }
    }
    let mut template = PlantingConfig::new(
        match &choice {
            PlantedChoice::Fixed(b) => b.clone(),
            PlantedChoice::Random => Bitstring::zeros(n),
        },
        a.seed,
    )
    .with_coefficients(a.coeffs.clone());
    if let Some(e) = &edge_set {
        template = template.with_edge_set(e.clone());
    }
    if let Some(b) = batch {
        template = template.with_batch_size(b);
    }
    if let Some(m) = a.max_clauses {
        template = template.with_max_clauses(m);
    }
    if let Err(e) = template.validate() {
        let hint = if edge_set.as_ref().is_some_and(|e| !e.inactive().is_empty() || !e.isolated_nodes().is_empty()) {
            "; pass --compact to drop isolated or dead nodes"
        } else {
            ""
        };
        return Err(usage(format!("{e}{hint}")));
    }

    let outcomes: Vec<Result<PathBuf, String>> = (0..a.count)
        .into_par_iter()
        .map(|k| {
            let seed = derive_seed(a.seed, k as u64);
            let mut cfg = template.clone();
            cfg.seed = seed;
            if let PlantedChoice::Random = choice {
                cfg.planted = random_planted(n, derive_seed(seed, PLANTED_STREAM));
            }
            let run = || -> posiform::Result<PathBuf> {
                let inst = plant_instance(&cfg)?;
                let stem = format!("{}-{k:04}", a.prefix);
                let path = a.out_dir.join(format!("{stem}.json"));
                InstanceFile::from_instance(&inst).write(&path)?;
                if a.dimacs {
                    write_atomic(&a.out_dir.join(format!("{stem}.cnf")), inst.formula.to_dimacs().as_bytes())?;
                }
                Ok(path)
            };
            run().map_err(|e| format!("instance {k}: {e}"))
        })
        .collect();

    let mut failed = 0;
    for o in &outcomes {
        match o {
            Ok(p) => println!("{}", p.display()),
            Err(msg) => {
                failed += 1;
                eprintln!("{msg}");
            }
        }
    }
    if failed > 0 {
        return Err(Failure::Failed(format!("{failed} of {} instances failed", a.count)));
    }
    Ok(())
}

/// Checks one instance file; returns the report lines and whether all
/// checks passed.
fn verify_one(path: &Path, cap: usize) -> Result<(Vec<String>, bool), Failure> {
    let f = InstanceFile::read(path)?;
    let q = f.qubo()?;
    let mut lines = Vec::new();
    let mut ok = true;

    let at_planted = q.energy(&f.planted)?;
    if at_planted == f.planted_energy && f.planted_energy == 0.0 {
        lines.push(format!(
            "planted energy: ok (posiform zero at planted, offset {})",
            f.offset
        ));
    } else {
        ok = false;
        lines.push(format!(
            "planted energy: FAIL energy at planted is {at_planted}, file records {} \
             (a planted posiform instance evaluates to 0)",
            f.planted_energy
        ));
    }

    if f.num_vars > cap {
        lines.push(format!(
            "uniqueness: certified-by-construction (n = {} above exhaustive cap {cap})",
            f.num_vars
        ));
    } else {
        let bf = brute_force_with_cap(&q, cap)?;
        if bf.minimizers == [f.planted.clone()] && bf.min_energy == f.planted_energy {
            lines.push(format!("uniqueness: ok (exhaustive over 2^{} states)", f.num_vars));
        } else {
            ok = false;
            let shown: Vec<String> = bf.minimizers.iter().take(4).map(|b| b.to_string()).collect();
            lines.push(format!(
                "uniqueness: FAIL minimum {} attained by {} state(s) [{}{}], planted {} at {}",
                bf.min_energy,
                bf.minimizers.len(),
                shown.join(", "),
                if bf.minimizers.len() > shown.len() { ", ..." } else { "" },
                f.planted,
                at_planted
            ));
        }
    }
    Ok((lines, ok))
}

pub fn verify(a: VerifyArgs) -> CmdResult {
    let mut failed = 0;
    for path in &a.instances {
        let (lines, ok) = match verify_one(path, a.exhaustive_cap) {
            Ok(r) => r,
            Err(Failure::Failed(msg) | Failure::Usage(msg)) => (vec![format!("unreadable: FAIL {msg}")], false),
        };
        for l in lines {
            println!("{}: {l}", path.display());
        }
        failed += usize::from(!ok);
    }
    if failed > 0 {
        return Err(Failure::Failed(format!(
            "{failed} of {} instances failed verification",
            a.instances.len()
        )));
    }
    Ok(())
}

fn time_source(arg: &str) -> Result<Option<TimeSource>, Failure> {
    match arg {
        "auto" => Ok(None),
        other => TimeSource::from_str(other)
            .map(Some)
            .map_err(|_| usage(format!("unknown time source {other:?}; use wall, work or auto"))),
    }
}

pub fn solve(a: SolveArgs) -> CmdResult {
    let source = time_source(&a.time_source)?.ok_or_else(|| usage("solve records wall or work time, not auto"))?;
    let f = InstanceFile::read(&a.instance)?;
    let q = f.qubo()?;
    let beta_range = match a.beta_range.as_deref() {
        None => None,
        Some(&[lo, hi]) => Some((lo, hi)),
        Some(_) => return Err(usage("--beta-range takes LO,HI")),
    };
    let params = SamplerParams {
        num_reads: a.reads,
        sweeps: a.sweeps,
        beta_range,
        seed: a.seed,
    };
    let s: SampleSet = match a.sampler {
        Sampler::Sa => simulated_annealing(&q, &params)?,
        Sampler::Greedy => steepest_descent(&q, &params)?,
        Sampler::Exhaustive => exhaustive_with_cap(&q, a.exhaustive_cap)?,
    };
    let file = SampleSetFile::new(file_id(&a.instance), Some(f.planted_energy), &s, source == TimeSource::Wall);
    let csv = a.out.as_ref().is_none_or(|p| p.extension().is_some_and(|e| e == "csv"));
    emit(a.out.as_deref(), &if csv { file.to_csv() } else { file.to_json() })?;

    let hits = s.records.iter().filter(|r| r.energy == f.planted_energy).count();
    let summary = format!(
        "{}: {} reads, best energy {}, gsp {} ({hits}/{}) against planted energy {}",
        s.sampler,
        s.len(),
        s.best_energy().map_or("-".into(), |e| e.to_string()),
        if s.is_empty() { 0.0 } else { hits as f64 / s.len() as f64 },
        s.len(),
        f.planted_energy
    );
    if a.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

pub fn eval(a: EvalArgs) -> CmdResult {
    let source = time_source(&a.time_source)?;
    let mut reports = Vec::with_capacity(a.samplesets.len());
    for path in &a.samplesets {
        if path.extension().is_some_and(|e| e == "csv") {
            return Err(Failure::Failed(format!(
                "{}: per-read CSV carries no planted_energy; pass the JSON sample set",
                path.display()
            )));
        }
        let f = SampleSetFile::read(path)?;
        let ts = source.unwrap_or(if f.wall_time_s.is_some() {
            TimeSource::Wall
        } else {
            TimeSource::Work
        });
        let r = f
            .report(ts)
            .map_err(|e| Failure::Failed(format!("{}: {e}", path.display())))?;
        reports.push(r);
    }
    emit(a.out.as_deref(), &reports_to_csv(&reports))
}

fn min_max_mean<'a>(vals: impl Iterator<Item = &'a f64>) -> (String, String, String) {
    let v: Vec<f64> = vals.copied().collect();
    if v.is_empty() {
        return (String::new(), String::new(), String::new());
    }
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (min.to_string(), max.to_string(), mean.to_string())
}

pub fn stats(a: StatsArgs) -> CmdResult {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: &[&str] = if a.terms {
        &["instance", "i", "j", "coefficient"]
    } else {
        &[
            "instance",
            "num_vars",
            "clause_count",
            "linear_terms",
            "couplers",
            "linear_min",
            "linear_max",
            "linear_mean",
            "quadratic_min",
            "quadratic_max",
            "quadratic_mean",
            "offset",
            "edge_set_label",
        ]
    };
    let fail = |e: csv::Error| Failure::Failed(e.to_string());
    w.write_record(header).map_err(fail)?;
    for path in &a.instances {
        let f = InstanceFile::read(path)?;
        let q = f.qubo()?;
        let id = file_id(path);
        if a.terms {
            // linear terms are listed with j empty
            for (i, c) in q.linear() {
                w.write_record([id.as_str(), &i.to_string(), "", &c.to_string()]).map_err(fail)?;
            }
            for ((i, j), c) in q.quadratic() {
                w.write_record([id.as_str(), &i.to_string(), &j.to_string(), &c.to_string()])
                    .map_err(fail)?;
            }
        } else {
            let (lmin, lmax, lmean) = min_max_mean(q.linear().values());
            let (qmin, qmax, qmean) = min_max_mean(q.quadratic().values());
            w.write_record([
                id.as_str(),
                &f.num_vars.to_string(),
                &f.clause_count.to_string(),
                &q.linear().len().to_string(),
                &q.quadratic().len().to_string(),
                &lmin,
                &lmax,
                &lmean,
                &qmin,
                &qmax,
                &qmean,
                &q.offset().to_string(),
                f.edge_set_label.as_deref().unwrap_or(""),
            ])
            .map_err(fail)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Failure::Failed(e.to_string()))?;
    emit(a.out.as_deref(), &String::from_utf8_lossy(&bytes))
}
