//! End-to-end tests of the binary: round trips, exit codes, golden container
//! bytes, stats output, and bench determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bdz() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bdz"))
}

fn run(args: &[&str]) -> Output {
    bdz().args(args).output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Dir(tempfile::TempDir);

impl Dir {
    fn new() -> Self {
        Dir(tempfile::tempdir().unwrap())
    }

    fn file(&self, name: &str, contents: &[u8]) -> PathBuf {
        let p = self.0.path().join(name);
        std::fs::write(&p, contents).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }
}

/// The 64-bit reference input as bytes.
const REFERENCE64_BYTES: [u8; 8] = [0x00, 0x55, 0x33, 0x77, 0x0F, 0x5F, 0x3F, 0x7F];

#[test]
fn compress_decompress_round_trip() {
    let dir = Dir::new();
    let data: Vec<u8> = (0..4096u32).map(|i| (i * 131 + 17) as u8).collect();
    let input = dir.file("data.bin", &data);
    let packed = dir.path("data.bdz");
    let restored = dir.path("data.out");

    let out = run(&["compress", path_str(&input), path_str(&packed)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["decompress", path_str(&packed), path_str(&restored)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read(&restored).unwrap(), data);
}

#[test]
fn constant_file_compresses_small() {
    let dir = Dir::new();
    let input = dir.file("zeros.bin", &[0u8; 64]);
    let packed = dir.path("zeros.bdz");
    let out = run(&["compress", path_str(&input), path_str(&packed)]);
    assert!(out.status.success());
    let size = std::fs::metadata(&packed).unwrap().len();
    assert!(size <= 8, "constant file took {size} bytes");
    let restored = dir.path("zeros.out");
    assert!(run(&["decompress", path_str(&packed), path_str(&restored)])
        .status
        .success());
    assert_eq!(std::fs::read(&restored).unwrap(), vec![0u8; 64]);
}

#[test]
fn reference_container_is_pinned() {
    let dir = Dir::new();
    let input = dir.file("ref.bin", &REFERENCE64_BYTES);
    let packed = dir.path("ref.bdz");
    assert!(run(&["compress", path_str(&input), path_str(&packed)])
        .status
        .success());
    assert_eq!(
        std::fs::read(&packed).unwrap(),
        vec![
            b'B', b'D', b'Z', b'1', 0x02, 0x05, 0xFF, 0xFF, 0xFF, 0xFF, 0x89, 0x5F, 0x55, 0x15,
            0x52, 0x00, 0xA4, 0x01, 0x50
        ]
    );
}

#[test]
fn empty_input_is_a_usage_error() {
    let dir = Dir::new();
    let input = dir.file("empty.bin", &[]);
    let out = run(&["compress", path_str(&input), path_str(&dir.path("x"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = Dir::new();
    let out = run(&[
        "compress",
        path_str(&dir.path("nope.bin")),
        path_str(&dir.path("x")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn corrupt_container_is_rejected_with_code_3() {
    let dir = Dir::new();
    let bogus = dir.file("bad.bdz", b"BDZ1\xFF\xFF\xFF\xFF\xFF\xFF");
    let out = run(&["decompress", path_str(&bogus), path_str(&dir.path("x"))]);
    assert_eq!(out.status.code(), Some(3));
    let not_even_magic = dir.file("bad2.bdz", b"hello");
    let out = run(&["decompress", path_str(&not_even_magic), path_str(&dir.path("y"))]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bad_flags_are_usage_errors() {
    let out = run(&["compress"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["bench", "--source", "coin", "--n", "16"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["bench", "--source", "bernoulli:0.5", "--n", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("compress"));
}

#[test]
fn stats_reference_table_and_json() {
    let dir = Dir::new();
    let input = dir.file("ref.bin", &REFERENCE64_BYTES);
    let out = run(&["stats", path_str(&input)]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    assert!(text.contains("16 reduced, 25 quasi-reduced"), "{text}");

    let out = run(&["stats", "--json", path_str(&input)]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["n"], 64);
    assert_eq!(v["core_k"], 6);
    assert_eq!(v["vertex_count"], 16);
    assert_eq!(v["quasi_vertex_count"], 25);
    assert_eq!(v["sum_s"], 38);
    assert_eq!(v["body_bits"], 106);
    let s_lens: Vec<u64> = v["levels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| row["s_len"].as_u64().unwrap())
        .collect();
    assert_eq!(s_lens, vec![2, 4, 8, 12, 7, 4]);
    let m5 = &v["levels"][3];
    assert_eq!(m5["level"], 5);
    assert_eq!(m5["paper_m"], 31);
    assert_eq!(m5["actual_bits"], 31);
}

#[test]
fn bench_rows_are_consistent_and_deterministic() {
    let out = run(&[
        "bench",
        "--source",
        "bernoulli:0.5",
        "--n",
        "1024",
        "--reps",
        "1",
        "--seed",
        "7",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,rep,codeword_bits,container_bits,log2_mu,redundancy,per_sample,theorem_budget"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "1024");
    let codeword: f64 = row[2].parse().unwrap();
    let redundancy: f64 = row[5].parse().unwrap();
    assert_eq!(redundancy, codeword - 1024.0);
    let budget: f64 = row[7].parse().unwrap();
    assert_eq!(budget, 16.0);

    let again = run(&[
        "bench",
        "--source",
        "bernoulli:0.5",
        "--n",
        "1024",
        "--reps",
        "1",
        "--seed",
        "7",
    ]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn bench_certain_source_has_zero_ideal_cost() {
    let out = run(&[
        "bench", "--source", "bernoulli:1.0", "--n", "2", "--reps", "1",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    // sample "11" reduces to a constant core: one literal bit, mu = 1
    assert_eq!(row[2], "1");
    assert_eq!(row[4], "0");
    assert_eq!(row[5], "1");
}

#[test]
fn bench_source_config_file() {
    let dir = Dir::new();
    let cfg = dir.file(
        "src.cfg",
        b"states 2\ninitial 0\nemit 0.9 0.1\nnext 0 0 1\nnext 1 0 1\nseed 5\n",
    );
    let csv = dir.path("rows.csv");
    let out = run(&[
        "bench",
        "--source",
        &format!("file:{}", path_str(&cfg)),
        "--n",
        "256,512",
        "--reps",
        "2",
        "--csv",
        path_str(&csv),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    // header + 4 rows
    assert_eq!(text.lines().count(), 5);
    // s = 2 states: budget 16 + 4*log2(2) = 20
    assert!(text.lines().nth(1).unwrap().ends_with(",20"));
}

#[test]
fn byte_level_round_trip_fuzz() {
    let dir = Dir::new();
    let mut state = 0x12345678u64;
    for trial in 0..12 {
        let len = 1 + (state as usize % 3000);
        let data: Vec<u8> = (0..len)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 33) as u8
            })
            .collect();
        let input = dir.file(&format!("f{trial}.bin"), &data);
        let packed = dir.path(&format!("f{trial}.bdz"));
        let restored = dir.path(&format!("f{trial}.out"));
        assert!(run(&["compress", path_str(&input), path_str(&packed)])
            .status
            .success());
        assert!(run(&["decompress", path_str(&packed), path_str(&restored)])
            .status
            .success());
        assert_eq!(std::fs::read(&restored).unwrap(), data, "trial {trial}");
    }
}
