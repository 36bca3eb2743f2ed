//! End-to-end runs of the `bridgenet` binary against hand-counted fixtures.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

const MESSAGES_CSV: &str = "\
channel_name,message_id,date,forward_msg_from_peer_name,views,forwards,replies
seedA,1,2022-02-01 10:00:00,origin1,100,5,2
seedA,2,2022-02-02 11:00:00,origin2,50,1,0
seedA,3,2022-02-03 12:00:00,origin1,80,2,1
seedB,4,2022-02-04 13:00:00,,10,0,0
seedB,5,2021-06-01 09:00:00,origin3,10,0,0
seedB,6,2022-02-05 14:00:00,seedB,10,0,0
seedB,7,2022-02-06 15:00:00,origin1,30,1,3
";

const CHATS_CSV: &str = "\
username,source
outX,seedA
outY,seedA
outX,seedA
seedb,seedB
";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bridgenet"))
}

fn run_ok(args: &[&str]) -> Output {
    let output = bin().args(args).output().expect("binary runs");
    assert!(
        output.status.success(),
        "command {args:?} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn write(path: &Path, content: &str) {
    fs::write(path, content).unwrap();
}

fn cycle_edgelist(n: usize) -> String {
    (0..n)
        .map(|i| format!("c{i:02}\tc{:02}\t1\n", (i + 1) % n))
        .collect()
}

#[test]
fn ingest_counts_match_hand_tally() {
    let dir = tempdir().unwrap();
    let messages = dir.path().join("messages.csv");
    let chats = dir.path().join("chats.csv");
    write(&messages, MESSAGES_CSV);
    write(&chats, CHATS_CSV);
    let out = dir.path().join("out");
    let output = run_ok(&[
        "ingest",
        "--messages",
        messages.to_str().unwrap(),
        "--chats",
        chats.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let stdout = String::from_utf8(output.stdout).unwrap();
    for expected in [
        "nodes: 6",
        "edges: 5",
        "forward events stored: 7",
        "dropped self-loops: 2",
        "rejected rows: 0",
        "events before cutoff: 1",
        "untimestamped events kept: 4",
        "events ingested: 9",
    ] {
        assert!(stdout.contains(expected), "missing {expected:?} in:\n{stdout}");
    }
    let edgelist = fs::read_to_string(out.join("graph.edgelist")).unwrap();
    assert_eq!(edgelist.lines().count(), 5);
    assert!(edgelist.contains("origin1\tseeda\t2"));
    assert!(edgelist.contains("seeda\toutx\t2"));
    assert!(out.join("graph.gexf").exists());
    assert!(out.join("rejects.csv").exists());
}

#[test]
fn ingest_empty_csv_yields_empty_graph_and_exit_zero() {
    let dir = tempdir().unwrap();
    let messages = dir.path().join("messages.csv");
    write(
        &messages,
        "channel_name,message_id,date,forward_msg_from_peer_name,views,forwards,replies\n",
    );
    let out = dir.path().join("out");
    let output = run_ok(&[
        "ingest",
        "--messages",
        messages.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("nodes: 0"));
    assert!(stdout.contains("edges: 0"));
    assert_eq!(fs::read_to_string(out.join("graph.edgelist")).unwrap(), "");
}

#[test]
fn missing_required_column_exits_nonzero_naming_it() {
    let dir = tempdir().unwrap();
    let messages = dir.path().join("messages.csv");
    write(&messages, "channel_name,date\nseedA,2022-02-01 10:00:00\n");
    let output = bin()
        .args([
            "ingest",
            "--messages",
            messages.to_str().unwrap(),
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(
        stderr.contains("forward_msg_from_peer_name"),
        "stderr should name the column: {stderr}"
    );
}

#[test]
fn rejects_report_quarantines_bad_rows() {
    let dir = tempdir().unwrap();
    let messages = dir.path().join("messages.csv");
    write(
        &messages,
        "channel_name,message_id,date,forward_msg_from_peer_name,views,forwards,replies\n\
         seedA,1,2022-02-01 10:00:00,origin1,100,5,2\n\
         seedA,2,garbage,origin2,1,1,1\n",
    );
    let out = dir.path().join("out");
    let output = run_ok(&[
        "ingest",
        "--messages",
        messages.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("rejected rows: 1"));
    let rejects = fs::read_to_string(out.join("rejects.csv")).unwrap();
    assert!(rejects.lines().count() >= 2);
    assert!(rejects.contains("timestamp"));
}

#[test]
fn analyze_emits_table_ordered_ranking_and_equal_scores_on_cycle() {
    let dir = tempdir().unwrap();
    let graph = dir.path().join("cycle.edgelist");
    write(&graph, &cycle_edgelist(8));
    let out = dir.path().join("out");
    run_ok(&[
        "analyze",
        "--graph",
        graph.to_str().unwrap(),
        "--resolution",
        "1.0",
        "--out",
        out.to_str().unwrap(),
    ]);
    let ranking = fs::read_to_string(out.join("ranking.csv")).unwrap();
    let mut lines = ranking.lines();
    assert_eq!(
        lines.next().unwrap(),
        "channel,clustering_norm,indegree_norm,eigenvector_norm,bridge_score"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 8);
    let scores: Vec<&str> = rows
        .iter()
        .map(|r| r.rsplit(',').next().unwrap())
        .collect();
    assert!(scores.iter().all(|s| s == &scores[0]), "cycle scores differ: {scores:?}");
    // Ties broken by id: the channel column must be ascending.
    let ids: Vec<&str> = rows.iter().map(|r| r.split(',').next().unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort_unstable();
    assert_eq!(ids, sorted);
    for file in ["metrics.csv", "partition.csv", "graph.gexf"] {
        assert!(out.join(file).exists(), "missing {file}");
    }
}

#[test]
fn optimize_degenerate_grid_is_single_consistent_row() {
    let dir = tempdir().unwrap();
    let graph = dir.path().join("g.edgelist");
    write(&graph, &cycle_edgelist(10));
    let out = dir.path().join("out");
    run_ok(&[
        "optimize",
        "--graph",
        graph.to_str().unwrap(),
        "--grid",
        "1..1",
        "--k",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    let grid = fs::read_to_string(out.join("grid.csv")).unwrap();
    let rows: Vec<&str> = grid.lines().collect();
    assert_eq!(rows.len(), 2, "header + one row: {grid}");
    assert_eq!(rows[0], "w_i,w_e,w_c,delta_density,top_nodes");
    let fields: Vec<&str> = rows[1].split(',').collect();
    let best: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("best_triple.json")).unwrap()).unwrap();
    assert_eq!(best["w_i"], 1.0);
    assert_eq!(best["combinations"], 1);
    assert_eq!(
        best["delta_density"].as_f64().unwrap().to_string(),
        fields[3]
    );
}

#[test]
fn perturb_remove_nothing_reports_zero_deltas() {
    let dir = tempdir().unwrap();
    let graph = dir.path().join("g.edgelist");
    write(&graph, &cycle_edgelist(6));
    let out = dir.path().join("out");
    let output = run_ok(&[
        "perturb",
        "--graph",
        graph.to_str().unwrap(),
        "--k",
        "0",
        "--resolution",
        "1.0",
        "--out",
        out.to_str().unwrap(),
    ]);
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("removed 0 node(s)"));
    assert!(stdout.contains("no change in network density"));
    assert!(stdout.contains("delta density: 0"));
    let report = fs::read_to_string(out.join("perturbation.csv")).unwrap();
    let data = report.lines().nth(1).unwrap();
    let fields: Vec<&str> = data.split(',').collect();
    // removed list empty, delta exactly 0.
    assert_eq!(fields[0], "");
    assert_eq!(fields[3], "0");
    assert!(out.join("before.gexf").exists());
    assert!(out.join("after.gexf").exists());
}

#[test]
fn perturb_reports_percent_change_lines_on_fragmenting_fixture() {
    let dir = tempdir().unwrap();
    let graph = dir.path().join("g.edgelist");
    // Two 5-cliques joined through a hub; removing the hub fragments into
    // two components.
    let mut lines = String::new();
    for c in ["a", "b"] {
        for i in 0..5 {
            for j in (i + 1)..5 {
                lines.push_str(&format!("{c}{i}\t{c}{j}\t1\n"));
            }
        }
    }
    for i in 0..5 {
        lines.push_str(&format!("a{i}\tmid\t1\n"));
        lines.push_str(&format!("mid\tb{i}\t1\n"));
    }
    write(&graph, &lines);
    let out = dir.path().join("out");
    let output = run_ok(&[
        "perturb",
        "--graph",
        graph.to_str().unwrap(),
        "--targets",
        "mid",
        "--k",
        "1",
        "--resolution",
        "0.2",
        "--comparative",
        "--out",
        out.to_str().unwrap(),
    ]);
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(
        stdout.contains("% increase in number of communities"),
        "stdout:\n{stdout}"
    );
    assert!(stdout.contains("% decrease in network density"));
    let comparative = fs::read_to_string(out.join("comparative.csv")).unwrap();
    assert_eq!(comparative.lines().count(), 5);
}

#[test]
fn stats_emit_engagement_and_gap_filled_series() {
    let dir = tempdir().unwrap();
    let messages = dir.path().join("messages.csv");
    write(&messages, MESSAGES_CSV);
    let out = dir.path().join("out");
    run_ok(&[
        "stats",
        "--messages",
        messages.to_str().unwrap(),
        "--bucket",
        "1d",
        "--out",
        out.to_str().unwrap(),
    ]);
    let engagement = fs::read_to_string(out.join("engagement.csv")).unwrap();
    // seedA: 3 messages, views (100+50+80)/3 = 76.66..; all three are
    // forwards -> fraction 1.
    let seeda = engagement
        .lines()
        .find(|l| l.starts_with("seeda,"))
        .expect("seedA row");
    let fields: Vec<&str> = seeda.split(',').collect();
    assert_eq!(fields[1], "3");
    assert_eq!(fields[2].parse::<f64>().unwrap(), 8.0 / 3.0);
    assert_eq!(fields[5], "1");
    let series = fs::read_to_string(out.join("posting_frequency.csv")).unwrap();
    // 2021-06-01 through 2022-02-06 daily buckets, inclusive.
    assert_eq!(series.lines().count() - 1, 251);
    assert!(series.contains("2021-06-01T00:00:00+00:00,1"));
    assert!(series.contains("2022-02-06T00:00:00+00:00,1"));
    assert!(series.contains("2021-06-02T00:00:00+00:00,0"));
}

#[test]
fn stats_channel_filter_restricts_rows() {
    let dir = tempdir().unwrap();
    let messages = dir.path().join("messages.csv");
    write(&messages, MESSAGES_CSV);
    let out = dir.path().join("out");
    run_ok(&[
        "stats",
        "--messages",
        messages.to_str().unwrap(),
        "--channels",
        "@SeedB",
        "--out",
        out.to_str().unwrap(),
    ]);
    let engagement = fs::read_to_string(out.join("engagement.csv")).unwrap();
    let rows: Vec<&str> = engagement.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("seedb,4,"));
}

#[test]
fn export_round_trips_between_formats() {
    let dir = tempdir().unwrap();
    let graph = dir.path().join("g.edgelist");
    write(&graph, &cycle_edgelist(5));
    let as_gexf = dir.path().join("gexf");
    run_ok(&[
        "export",
        "--graph",
        graph.to_str().unwrap(),
        "--format",
        "gexf",
        "--out",
        as_gexf.to_str().unwrap(),
    ]);
    let back = dir.path().join("back");
    run_ok(&[
        "export",
        "--graph",
        as_gexf.join("graph.gexf").to_str().unwrap(),
        "--format",
        "edgelist",
        "--out",
        back.to_str().unwrap(),
    ]);
    assert_eq!(
        fs::read_to_string(&graph).unwrap(),
        fs::read_to_string(back.join("graph.edgelist")).unwrap()
    );
}

#[test]
fn rejecting_both_graph_sources_names_the_conflict() {
    let dir = tempdir().unwrap();
    let graph = dir.path().join("g.edgelist");
    write(&graph, &cycle_edgelist(4));
    let messages = dir.path().join("m.csv");
    write(
        &messages,
        "channel_name,message_id,date,forward_msg_from_peer_name,views,forwards,replies\n",
    );
    let output = bin()
        .args([
            "analyze",
            "--graph",
            graph.to_str().unwrap(),
            "--messages",
            messages.to_str().unwrap(),
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("not both"), "stderr: {stderr}");
}
