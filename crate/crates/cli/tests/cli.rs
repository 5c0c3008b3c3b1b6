use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn posiform(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_posiform"))
        .args(args)
        .current_dir(dir)
        .env_remove("POSIFORM_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = posiform(args, dir);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn jsons_in(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    v.sort();
    v
}

/// Energy of the instance stored in `f` at `x`, evaluated from the raw JSON.
fn energy(f: &Value, x: &[bool]) -> f64 {
    let mut e = f["offset"].as_f64().unwrap();
    for (k, c) in f["linear"].as_object().unwrap() {
        if x[k.parse::<usize>().unwrap()] {
            e += c.as_f64().unwrap();
        }
    }
    for t in f["quadratic"].as_array().unwrap() {
        let (i, j) = (t[0].as_u64().unwrap() as usize, t[1].as_u64().unwrap() as usize);
        if x[i] && x[j] {
            e += t[2].as_f64().unwrap();
        }
    }
    e
}

fn hex_bits(hex: &str, n: usize) -> Vec<bool> {
    hex.chars()
        .flat_map(|c| {
            let d = c.to_digit(16).unwrap();
            (0..4).map(move |k| d >> (3 - k) & 1 == 1)
        })
        .take(n)
        .collect()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

#[test]
fn graph_kinds_and_counts() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let s = ok(&["graph", "chimera", "16", "-o", "c16.edges"], p);
    assert!(s.contains("2048 nodes"));
    assert!(fs::read_to_string(p.join("c16.edges")).unwrap().starts_with("n 2048\n"));

    let s = ok(&["graph", "complete", "3"], p);
    assert_eq!(s, "n 3\n0 1\n0 2\n1 2\n");

    let s = ok(&["graph", "zephyr", "4", "--defect-nodes", "13", "-o", "z4.edges"], p);
    assert!(s.contains("(563 active)"), "{s}");
    // recount from the file: dead qubits are the ones left without couplers
    let text = fs::read_to_string(p.join("z4.edges")).unwrap();
    let mut touched = std::collections::BTreeSet::new();
    for line in text.lines().skip(1) {
        for v in line.split(' ') {
            touched.insert(v.parse::<usize>().unwrap());
        }
    }
    assert_eq!(touched.len(), 563);

    let s = ok(&["graph", "hardware", "Advantage_system4.1", "-o", "a41.edges"], p);
    assert!(s.contains("(5627 active), 40279 edges"), "{s}");
}

#[test]
fn usage_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    for args in [
        vec!["graph", "chimera", "0"],
        vec!["graph", "hardware", "no_such_chip"],
        vec!["graph", "bogus", "3"],
        vec!["plant"],
        vec!["plant", "--topology", "torus:3"],
        vec!["plant", "-n", "4", "--planted", "10"],
        vec!["plant", "-n", "4", "--coeffs", "1,-2"],
        vec!["solve", "x.json", "tabu"],
    ] {
        let out = posiform(&args, p);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = Command::new(env!("CARGO_BIN_EXE_posiform"))
        .args(["graph", "complete", "2"])
        .env("POSIFORM_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn worked_example_seed() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(&["plant", "-n", "3", "--planted", "101", "--seed", "2914511", "--prefix", "ex"], p);
    let f = json(&p.join("ex-0000.json"));
    assert_eq!(f["linear"], serde_json::json!({"1": 1, "2": 1}));
    assert_eq!(f["quadratic"], serde_json::json!([[0, 2, -2]]));
    assert_eq!(f["offset"], 1);
    assert_eq!(f["clause_count"], 6);
    let v = ok(&["verify", "ex-0000.json"], p);
    assert!(v.contains("uniqueness: ok"));
}

#[test]
fn single_variable_instance() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(&["plant", "-n", "1", "--planted", "0", "--prefix", "one"], p);
    let f = json(&p.join("one-0000.json"));
    assert_eq!(f["clause_count"], 1);
    assert_eq!(f["quadratic"], serde_json::json!([]));
    // x = 1 costs more than the planted x = 0
    assert!(energy(&f, &[true]) > energy(&f, &[false]));
    ok(&["verify", "one-0000.json"], p);
}

#[test]
fn verify_detects_corruption_and_reports_cap() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(&["plant", "-n", "12", "--seed", "4", "--prefix", "small"], p);
    ok(&["plant", "-n", "30", "--seed", "4", "--prefix", "big"], p);
    let big = ok(&["verify", "big-0000.json"], p);
    assert!(big.contains("uniqueness: certified-by-construction"), "{big}");

    let f = json(&p.join("small-0000.json"));
    let planted: Vec<bool> = f["planted"].as_array().unwrap().iter().map(|b| b == 1).collect();
    // flip the sign of one linear coefficient on a variable set in the
    // planted string, which moves the energy there
    let mut bad = f.clone();
    let lin = bad["linear"].as_object_mut().unwrap();
    let (k, c) = lin
        .iter()
        .find(|(k, _)| planted[k.parse::<usize>().unwrap()])
        .map(|(k, c)| (k.clone(), c.as_f64().unwrap()))
        .unwrap();
    lin.insert(k, serde_json::json!(-c));
    fs::write(p.join("bad.json"), serde_json::to_string_pretty(&bad).unwrap()).unwrap();
    let out = posiform(&["verify", "small-0000.json", "bad.json"], p);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("bad.json: planted energy: FAIL energy at planted is"), "{text}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("1 of 2 instances failed verification"));
    assert!(text.contains("small-0000.json: uniqueness: ok"));
}

#[test]
fn plant_verify_round_trip_on_desk_topologies() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    for topo in ["chimera:4", "zephyr:2", "pegasus:3"] {
        let dir = topo.replace(':', "");
        let listed = ok(&["plant", "--topology", topo, "--count", "100", "--seed", "7", "--out-dir", &dir], p);
        assert_eq!(listed.lines().count(), 100);
        let files = jsons_in(&p.join(&dir));
        assert_eq!(files.len(), 100);
        let mut args = vec!["verify".to_owned()];
        args.extend(files.iter().map(|f| f.display().to_string()));
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let report = ok(&args, p);
        assert_eq!(report.matches("planted energy: ok").count(), 100, "{topo}");
    }
}

#[test]
fn chimera16_batch_from_edge_list() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(&["graph", "chimera", "16", "-o", "chimera16.edges"], p);
    ok(&["plant", "--graph", "chimera16.edges", "--count", "100", "--seed", "7", "--out-dir", "c16"], p);
    let files = jsons_in(&p.join("c16"));
    assert_eq!(files.len(), 100);
    let mut args = vec!["verify".to_owned()];
    args.extend(files.iter().map(|f| f.display().to_string()));
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    ok(&args, p);
    let f = json(&files[0]);
    assert_eq!(f["edge_set_label"], "chimera16");
    assert_eq!(f["num_vars"], 2048);
}

#[test]
fn hardware_plant_requires_compaction() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let out = posiform(&["plant", "--topology", "hardware:Advantage2_prototype1.1"], p);
    assert_eq!(out.status.code(), Some(2));
    ok(&["plant", "--topology", "hardware:Advantage2_prototype1.1", "--compact", "--prefix", "z"], p);
    let f = json(&p.join("z-0000.json"));
    assert_eq!(f["num_vars"], 563);
    assert_eq!(f["batch_size"], 1000);
    let nodes = fs::read_to_string(p.join("z.nodes")).unwrap();
    assert_eq!(nodes.lines().count(), 563);
    ok(&["verify", "z-0000.json"], p);
}

#[test]
fn solve_samplers() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(&["plant", "-n", "12", "--seed", "5", "--prefix", "i"], p);
    let inst = json(&p.join("i-0000.json"));
    let planted_energy = inst["planted_energy"].as_f64().unwrap();

    let sa = ok(&["solve", "i-0000.json", "sa", "--reads", "800"], p);
    assert!(sa.starts_with("read_id,energy,bitstring_hex,sampler,seed\n"));
    assert_eq!(csv_rows(&sa).len(), 800);

    let ex = ok(&["solve", "i-0000.json", "exhaustive"], p);
    let rows = csv_rows(&ex);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), planted_energy);
    let planted: Vec<bool> = inst["planted"].as_array().unwrap().iter().map(|b| b == 1).collect();
    assert_eq!(hex_bits(&rows[0][2], 12), planted);

    let gr = ok(&["solve", "i-0000.json", "greedy", "--reads", "100"], p);
    let rows = csv_rows(&gr);
    assert_eq!(rows.len(), 100);
    for r in rows {
        let x = hex_bits(&r[2], 12);
        let e = energy(&inst, &x);
        assert_eq!(e, r[1].parse::<f64>().unwrap());
        assert!(e >= planted_energy);
        // a local minimum: no single flip lowers the energy
        for i in 0..12 {
            let mut y = x.clone();
            y[i] = !y[i];
            assert!(energy(&inst, &y) >= e);
        }
    }
}

#[test]
fn eval_edge_cases() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(&["plant", "-n", "10", "--seed", "2", "--prefix", "i"], p);
    ok(&["solve", "i-0000.json", "exhaustive", "-o", "ex.json"], p);
    let report = ok(&["eval", "ex.json"], p);
    let rows = csv_rows(&report);
    assert_eq!(report.lines().next().unwrap(), "instance,sampler,A,p,tts_99,total_time_s,time_source");
    let (a, gsp, tts, total): (f64, f64, f64, f64) = (
        rows[0][2].parse().unwrap(),
        rows[0][3].parse().unwrap(),
        rows[0][4].parse().unwrap(),
        rows[0][5].parse().unwrap(),
    );
    assert_eq!(gsp, 1.0);
    assert_eq!(tts, total / a);

    // nothing can reach an energy below the optimum
    let mut f = json(&p.join("ex.json"));
    f["planted_energy"] = serde_json::json!(-1000);
    fs::write(p.join("never.json"), f.to_string()).unwrap();
    let rows = csv_rows(&ok(&["eval", "never.json"], p));
    assert_eq!(rows[0][3], "0");
    assert_eq!(rows[0][4], "");

    f["planted_energy"] = Value::Null;
    fs::write(p.join("blind.json"), f.to_string()).unwrap();
    assert_eq!(posiform(&["eval", "blind.json"], p).status.code(), Some(1));
}

#[test]
fn batch_gsp_recomputes_from_raw_csv() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(&["plant", "--topology", "chimera:1", "--count", "100", "--seed", "3", "--out-dir", "inst"], p);
    let mut jsons = Vec::new();
    let mut recount = 0.0;
    for (k, inst) in jsons_in(&p.join("inst")).iter().enumerate() {
        let id = format!("s{k:03}");
        let seed = k.to_string();
        let i = inst.display().to_string();
        let j = format!("{id}.json");
        let c = format!("{id}.csv");
        for out in [&j, &c] {
            ok(
                &["solve", &i, "sa", "-o", out, "--reads", "20", "--sweeps", "5", "--seed", &seed, "--time-source", "work"],
                p,
            );
        }
        jsons.push(j);
        let ground = json(inst)["planted_energy"].as_f64().unwrap();
        let rows = csv_rows(&fs::read_to_string(p.join(&c)).unwrap());
        let hits = rows.iter().filter(|r| r[1].parse::<f64>().unwrap() == ground).count();
        recount += hits as f64 / rows.len() as f64;
    }
    let mut args = vec!["eval"];
    args.extend(jsons.iter().map(String::as_str));
    let report = ok(&args, p);
    let rows = csv_rows(&report);
    assert_eq!(rows.len(), 100);
    let mean: f64 = rows.iter().map(|r| r[3].parse::<f64>().unwrap()).sum::<f64>() / 100.0;
    assert!((mean - recount / 100.0).abs() < 1e-12);
    assert!(rows.iter().all(|r| r[6] == "work"));
}

#[test]
fn identical_invocations_give_identical_bytes() {
    let runs: Vec<Vec<(String, Vec<u8>)>> = (0..2)
        .map(|run| {
            let d = tempfile::tempdir().unwrap();
            let p = d.path();
            let threads = if run == 0 { "1" } else { "3" };
            let steps: [&[&str]; 5] = [
                &["plant", "--topology", "chimera:2", "--count", "5", "--seed", "11", "--out-dir", "o", "--dimacs"],
                &["solve", "o/instance-0003.json", "sa", "--reads", "64", "--seed", "1", "--time-source", "work", "-o", "sa.json"],
                &["solve", "o/instance-0003.json", "greedy", "--reads", "64", "--time-source", "work", "-o", "gr.csv"],
                &["eval", "sa.json", "-o", "report.csv"],
                &["stats", "o/instance-0000.json", "o/instance-0003.json", "-o", "stats.csv"],
            ];
            for s in steps {
                let mut a = vec!["--threads", threads];
                a.extend_from_slice(s);
                ok(&a, p);
            }
            let mut files = Vec::new();
            for dir in [p.to_path_buf(), p.join("o")] {
                for e in fs::read_dir(&dir).unwrap() {
                    let path = e.unwrap().path();
                    if path.is_file() {
                        let name = path.strip_prefix(p).unwrap().display().to_string();
                        files.push((name, fs::read(&path).unwrap()));
                    }
                }
            }
            files.sort();
            files
        })
        .collect();
    assert_eq!(runs[0].len(), 14);
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn stats_tables() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(&["plant", "--topology", "chimera:2", "--count", "3", "--out-dir", "o"], p);
    let summary = ok(&["stats", "o/instance-0000.json", "o/instance-0001.json", "o/instance-0002.json"], p);
    assert_eq!(summary.lines().count(), 4);
    let f = json(&p.join("o/instance-0001.json"));
    let terms = ok(&["stats", "--terms", "o/instance-0001.json"], p);
    let expected = f["linear"].as_object().unwrap().len() + f["quadratic"].as_array().unwrap().len();
    assert_eq!(terms.lines().count(), expected + 1);
}
