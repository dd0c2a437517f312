use std::process::Command;

use covergap::{formats, load_table, sieve_cache};
use covergap_core::smooth_scan::descend;
use covergap_core::{Congruence, CoveringSystem, FactorTable, ScanConfig};

fn encoded(limit: u64) -> (FactorTable, Vec<u8>) {
    let t = FactorTable::build(limit).unwrap();
    let mut bytes = Vec::new();
    sieve_cache::encode(&mut bytes, &t).unwrap();
    (t, bytes)
}

#[test]
fn sieve_cache_round_trip() {
    let (t, bytes) = encoded(3000);
    assert_eq!(&bytes[..5], sieve_cache::MAGIC);
    assert_eq!(bytes.len(), 5 + 8 + 8 * 3000);
    assert_eq!(sieve_cache::decode(&bytes[..]).unwrap(), t);
}

#[test]
fn damaged_caches_are_rejected() {
    let (_, bytes) = encoded(3000);
    let mut bad_magic = bytes.clone();
    bad_magic[0] = b'X';
    assert!(sieve_cache::decode(&bad_magic[..]).is_err());
    assert!(sieve_cache::decode(&bytes[..bytes.len() - 1]).is_err());
    let mut trailing = bytes.clone();
    trailing.push(0);
    assert!(sieve_cache::decode(&trailing[..]).is_err());
    let mut tampered = bytes.clone();
    tampered[13 + 4 * 999] ^= 1;
    assert!(sieve_cache::decode(&tampered[..]).is_err());
}

#[test]
fn load_table_reuses_or_grows_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sieve.bin");
    let small = load_table(1000, Some(&path)).unwrap();
    assert_eq!(small.limit(), 1000);
    assert_eq!(sieve_cache::read(&path).unwrap(), small);
    assert_eq!(load_table(500, Some(&path)).unwrap().limit(), 1000);
    assert_eq!(load_table(2000, Some(&path)).unwrap().limit(), 2000);
    assert_eq!(sieve_cache::read(&path).unwrap().limit(), 2000);
}

#[test]
fn covering_lines_round_trip() {
    let text = "{\"a\": 0, \"n\": 2}\n\n{\"a\": -1, \"n\": 4}\n{\"a\": 7, \"n\": 4}\n";
    let sys = formats::read_covering(text.as_bytes()).unwrap();
    let got: Vec<(u64, u64)> = sys.congruences.iter().map(|c| (c.residue, c.modulus)).collect();
    assert_eq!(got, [(0, 2), (3, 4), (3, 4)]);
    let mut out = Vec::new();
    formats::write_covering(&mut out, &sys).unwrap();
    assert_eq!(formats::read_covering(&out[..]).unwrap(), sys);
    assert!(formats::read_covering("{\"a\": 1}\n".as_bytes()).is_err());
    assert!(formats::read_covering("{\"a\": 1, \"n\": 0}\n".as_bytes()).is_err());
}

#[test]
fn scan_csv_columns() {
    let t = FactorTable::build(20_000).unwrap();
    let chain = descend(&t, &ScanConfig { k: 10, min_m: 117, max_m: 2000 }, 117).unwrap();
    let mut out = Vec::new();
    formats::write_scan_csv(&mut out, &chain).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m_low,m_high,bound_num,bound_den,bound_approx"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), chain.anchors.len());
    assert_eq!(rows[0][1], "2000");
    assert!(rows.iter().all(|r| r[4].starts_with("0.") && r[4].len() == 18));
}

#[test]
fn verify_command_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sys: &CoveringSystem| {
        let path = dir.path().join("c.jsonl");
        formats::write_covering(std::fs::File::create(&path).unwrap(), sys).unwrap();
        Command::new(env!("CARGO_BIN_EXE_covergap")).arg("verify").arg(&path).status().unwrap().code()
    };
    let cover = CoveringSystem::new(
        [(0, 2), (0, 3), (1, 4), (5, 6), (7, 12)].iter().map(|&(a, n)| Congruence::new(a, n).unwrap()).collect(),
    );
    assert_eq!(run(&cover), Some(0));
    let mut gap = cover.clone();
    gap.congruences.pop();
    assert_eq!(run(&gap), Some(1));
}
