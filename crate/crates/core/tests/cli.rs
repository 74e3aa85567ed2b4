//! End-to-end runs of the command-line front end.

mod common;

use std::fs;
use std::path::Path;

use cegrp::cli::batch::{load_instance, run_batch};
use cegrp::cli::{plot_solution, run};
use cegrp::driver::DriverParams;
use cegrp::instance::{generate_instance, serialize_instance};
use cegrp::solution::{parse_solution, total_distance, Solution};
use common::{medium_params, tiny_params};

fn write_instance(dir: &Path, name: &str, seed: u64, radius: f64) -> std::path::PathBuf {
    let inst = generate_instance(seed, &tiny_params(3, 3, radius)).unwrap().with_name(name);
    let path = dir.join(format!("{name}.json"));
    fs::write(&path, serialize_instance(&inst)).unwrap();
    path
}

fn cli(args: &[&str]) -> i32 {
    run(std::iter::once("ce-grp").chain(args.iter().copied()))
}

#[test]
fn batch_rows_and_reported_objectives() {
    let dir = tempfile::tempdir().unwrap();
    write_instance(dir.path(), "a", 1, 30.0);
    write_instance(dir.path(), "b", 2, 0.0);
    fs::write(dir.path().join("refs.csv"), "instance,best_known\na,1000\n").unwrap();
    let manifest = dir.path().join("manifest.txt");
    fs::write(&manifest, "# two instances\na.json\n\nb.json\n").unwrap();
    let out = dir.path().join("out");
    let code = cli(&[
        "batch", manifest.to_str().unwrap(), "--reps", "3", "--workers", "2", "--base-seed", "4",
        "--out", out.to_str().unwrap(), "--reference", dir.path().join("refs.csv").to_str().unwrap(),
    ]);
    assert_eq!(code, 0);

    let mut rdr = csv::Reader::from_path(out.join("runs.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2 * 3);
    for row in &rows {
        let name = &row[col("instance")];
        let rep = &row[col("rep")];
        assert_eq!(row[col("seed")].parse::<u64>().unwrap(), 4 + rep.parse::<u64>().unwrap());
        let inst = load_instance(&dir.path().join(format!("{name}.json"))).unwrap();
        let text = fs::read_to_string(out.join("solutions").join(format!("{name}.rep{rep}.solution.json"))).unwrap();
        let file = parse_solution(&text).unwrap();
        let recomputed = total_distance(&file.solution, &inst, file.points.as_ref()).unwrap();
        let reported: f64 = row[col("objective")].parse().unwrap();
        assert!((recomputed - reported).abs() <= 1e-9 * reported.max(1.0));
        assert!(out.join("logs").join(format!("{name}.rep{rep}.runlog.jsonl")).exists());
    }

    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    let a_line = summary.lines().find(|l| l.starts_with("a,")).unwrap();
    assert!(a_line.contains(",1000"), "{a_line}");
}

#[test]
fn batch_is_independent_of_worker_count() {
    let instances: Vec<_> = (0..3).map(|i| generate_instance(50 + i, &medium_params(20.0)).unwrap()).collect();
    let params = DriverParams { max_it: 20, ..DriverParams::default() };
    let one = run_batch(&instances, &params, 2, 9, 1).unwrap();
    let many = run_batch(&instances, &params, 2, 9, 4).unwrap();
    let key = |o: &cegrp::cli::batch::RunOutput| (o.row.instance.clone(), o.row.rep, o.row.objective.map(f64::to_bits));
    assert_eq!(one.iter().map(key).collect::<Vec<_>>(), many.iter().map(key).collect::<Vec<_>>());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_instance(dir.path(), "x", 3, 25.0);
    let f = file.to_str().unwrap();
    let out = dir.path().join("o");
    assert_eq!(cli(&["solve", f, "--seed", "2", "--no-threshold-reincrease", "--out", out.to_str().unwrap()]), 0);
    let sol = out.join("x.solution.json");
    assert_eq!(cli(&["validate", f, sol.to_str().unwrap()]), 0);

    let mut text = fs::read_to_string(&sol).unwrap();
    text = text.replacen("\"id\": 1", "\"id\": 99", 1);
    let broken = dir.path().join("broken.json");
    fs::write(&broken, &text).unwrap();
    assert_eq!(cli(&["validate", f, broken.to_str().unwrap()]), 2);

    let far = generate_instance(3, &tiny_params(2, 0, 0.0)).unwrap();
    let far = far.with_fleet(cegrp::FleetSpec { flight_range: 1.0, ..*far.fleet() });
    let far_path = dir.path().join("far.json");
    fs::write(&far_path, serialize_instance(&far)).unwrap();
    assert_eq!(cli(&["solve", far_path.to_str().unwrap()]), 3);
    assert_eq!(cli(&["oracle", far_path.to_str().unwrap()]), 3);

    assert_eq!(cli(&["solve", dir.path().join("missing.json").to_str().unwrap()]), 1);
    let params = dir.path().join("params.json");
    fs::write(&params, r#"{"MaxIt": 5, "typo": 1}"#).unwrap();
    assert_eq!(cli(&["solve", f, "--params", params.to_str().unwrap()]), 1);
    fs::write(&params, r#"{"MaxIt": 5, "it_max": 3}"#).unwrap();
    assert_eq!(cli(&["solve", f, "--params", params.to_str().unwrap()]), 0);
}

#[test]
fn oracle_and_plot_commands() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_instance(dir.path(), "p", 8, 40.0);
    let out = dir.path().join("o");
    assert_eq!(cli(&["oracle", file.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    let sol = out.join("p.oracle.json");
    assert_eq!(cli(&["validate", file.to_str().unwrap(), sol.to_str().unwrap()]), 0);
    assert_eq!(cli(&["plot", sol.to_str().unwrap(), "--instance", file.to_str().unwrap()]), 0);
    let svg = fs::read_to_string(out.join("p.oracle.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert_eq!(svg.matches("class=\"disk\"").count(), 3);
}

#[test]
fn plot_shapes() {
    let inst = generate_instance(1, &tiny_params(2, 1, 0.0)).unwrap();
    let empty = plot_solution(&Solution::default(), None, &inst);
    assert_eq!(empty.matches("<polyline").count(), 0);
    assert!(empty.contains("class=\"depot\""));
    assert_eq!(empty.matches("class=\"disk\"").count(), 0);

    let res = cegrp::driver::solve(&inst.with_radius(10.0), &DriverParams { max_it: 5, ..DriverParams::default() }).unwrap();
    let one = Solution::new(vec![res.solution.routes[0].clone()]);
    let svg = plot_solution(&one, None, &inst.with_radius(10.0));
    assert_eq!(svg.matches("<polyline").count(), 1);
    assert_eq!(svg.matches("class=\"disk\"").count(), 2);
}

#[test]
fn sweep_and_ablate_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_instance(dir.path(), "s", 4, 0.0);
    let sweep = dir.path().join("sweep.csv");
    let params = dir.path().join("params.json");
    fs::write(&params, r#"{"MaxIt": 10}"#).unwrap();
    let p = params.to_str().unwrap();
    assert_eq!(
        cli(&["sweep-radius", file.to_str().unwrap(), "--radii", "10,50", "--reps", "2", "--params", p, "--out", sweep.to_str().unwrap()]),
        0
    );
    let text = fs::read_to_string(&sweep).unwrap();
    assert!(text.starts_with("radius,"));
    assert_eq!(text.lines().count(), 3);

    let abl = dir.path().join("abl.csv");
    assert_eq!(cli(&["ablate", file.to_str().unwrap(), "--reps", "2", "--params", p, "--out", abl.to_str().unwrap()]), 0);
    assert_eq!(fs::read_to_string(&abl).unwrap().lines().count(), 2);
}

#[test]
fn generate_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    let code = cli(&["generate", "--seed", "5", "--nodes", "4", "--edges", "2", "--vehicles", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let inst = load_instance(&path).unwrap();
    assert_eq!((inst.nodes().len(), inst.edges().len(), inst.fleet().max_vehicles), (4, 2, Some(3)));
}
