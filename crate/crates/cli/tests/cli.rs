use std::fs;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use quelab_cli::cache::{Cache, CacheEntry, CacheKey};
use quelab_cli::emit;
use quelab_core::eigenforms::eigen_decompose;
use quelab_core::verify::BasisProvider;

fn quelab(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quelab"))
        .args(args)
        .env("QUELAB_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn vertical_csv_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = quelab(dir.path(), &["verify", "vertical", "--weights", "12,16,24", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let golden = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/vertical_12_16_24.csv")).unwrap();
    assert_eq!(text, golden);
    // e_k is recomputable from the I column.
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let i: f64 = f[2].parse().unwrap();
        let e: f64 = f[3].parse().unwrap();
        assert!((e - (i * std::f64::consts::PI / 3.0 - 1.0).abs()).abs() < 1e-14);
    }
}

#[test]
fn empty_grid_gives_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = quelab(dir.path(), &["verify", "vertical", "--k-min", "14", "--k-max", "14", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "k,index,I,e_k\n");
}

#[test]
fn json_report_roundtrips() {
    let dir = tempfile::tempdir().unwrap();
    let o = quelab(dir.path(), &["verify", "siegel", "--k-min", "12", "--k-max", "24"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let r = emit::from_json(&text).unwrap();
    assert_eq!(r.scenario, "siegel");
    assert_eq!(r.verdict.as_str(), "PASS");
    assert_eq!(r.runtime_s, None);
    assert_eq!(emit::to_json(&r), text);
}

#[test]
fn warm_and_cold_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["verify", "vertical", "--weights", "12,24,36", "--format", "csv"];
    let cold = quelab(dir.path(), &args);
    let warm1 = quelab(dir.path(), &args);
    let warm2 = quelab(dir.path(), &args);
    let mut nocache: Vec<&str> = args.to_vec();
    nocache.push("--no-cache");
    let direct = quelab(dir.path(), &nocache);
    assert_eq!(cold.stdout, warm1.stdout);
    assert_eq!(warm1.stdout, warm2.stdout);
    assert_eq!(direct.stdout, cold.stdout);
}

#[test]
fn truncated_entry_is_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["verify", "vertical", "--weights", "24", "--format", "csv"];
    let first = quelab(dir.path(), &args);
    let mut hit = 0;
    for e in fs::read_dir(dir.path()).unwrap() {
        let p = e.unwrap().path();
        let bytes = fs::read(&p).unwrap();
        fs::write(&p, &bytes[..bytes.len() / 2]).unwrap();
        hit += 1;
    }
    assert!(hit >= 2);
    let second = quelab(dir.path(), &args);
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    assert!(String::from_utf8_lossy(&second.stderr).contains("corrupt cache entry"));
    // Entries were rewritten and now load cleanly.
    let third = quelab(dir.path(), &args);
    assert!(third.stderr.is_empty());
    assert_eq!(third.stdout, first.stdout);
}

#[test]
fn cache_put_get_roundtrip_and_precision_key() {
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::open(dir.path()).unwrap();
    let b = eigen_decompose(36, 20, 128).unwrap();
    let e = CacheEntry::from_basis(&b);
    cache.put(&e).unwrap();
    let back = cache.get(&e.key).unwrap().unwrap();
    assert_eq!(back, e);
    assert_eq!(back.to_basis().unwrap(), b);
    assert_eq!(cache.get(&CacheKey::new(36, 20, 256)).unwrap(), None);

    let fresh = Cache::open(dir.path()).unwrap();
    fresh.basis(36, 20, 128).unwrap();
    assert_eq!(fresh.stats(), (1, 0, 0));
    fresh.basis(36, 20, 256).unwrap();
    assert_eq!(fresh.stats(), (1, 1, 0));
    assert!(fresh.path(&CacheKey::new(36, 20, 256)).exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(quelab(dir.path(), &["verify", "vertical", "--bogus"]).status.code(), Some(2));
    assert_eq!(quelab(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(quelab(dir.path(), &["verify", "vertical", "--precision", "64"]).status.code(), Some(2));
    assert_eq!(quelab(dir.path(), &["verify", "vertical", "--weights", "13"]).status.code(), Some(2));
    assert_eq!(quelab(dir.path(), &["--help"]).status.code(), Some(0));
    // dim S_12 = 1: numeric error
    let o = quelab(dir.path(), &["verify", "orthogonality", "--weights", "12"]);
    assert_eq!(o.status.code(), Some(3));
    // The (0, 1/4) window trend is not decreasing on the default grid.
    let o = quelab(dir.path(), &["verify", "horizontal", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn mass_rect_full_period_is_vertical_mass() {
    let dir = tempfile::tempdir().unwrap();
    let o = quelab(
        dir.path(),
        &["mass", "rect", "--weight", "12", "--index", "1", "--a", "-0.5", "--b", "0.5", "--t1", "1.0"],
    );
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["mass"], v["vertical_mass"]);
    let m: f64 = v["mass"].as_str().unwrap().parse().unwrap();
    assert!((m - 0.826299048606013).abs() < 1e-14);
    let o = quelab(dir.path(), &["mass", "rect", "--weight", "12", "--index", "2", "--a", "0", "--b", "0.5", "--t1", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn other_commands() {
    let dir = tempfile::tempdir().unwrap();
    let o = quelab(dir.path(), &["eigenforms", "--weight", "12", "--ncoeffs", "3", "--format", "csv", "--digits", "10"]);
    assert_eq!(stdout(&o), "k,index,n,lambda\n12,1,1,1.000000000\n12,1,2,-5.303300859e-1\n12,1,3,5.987336125e-1\n");
    let o = quelab(dir.path(), &["norm", "--weight", "12", "--index", "1"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let n: f64 = v["norm_sq"].as_str().unwrap().parse().unwrap();
    assert!((n / 1.0353620568043209e-6 - 1.0).abs() < 1e-9);
    let o = quelab(dir.path(), &["mass", "siegel", "--weight", "12", "--index", "1", "--t", "120"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["in_hypothesis"], true);
}

#[test]
fn sweep_writes_reports_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("reports");
    let cfg = dir.path().join("sweep.toml");
    fs::write(
        &cfg,
        format!(
            "out_dir = {:?}\nformat = \"csv\"\n\n[[scenario]]\nkind = \"vertical\"\nparams = {{ weights = [12, 16] }}\n\n[[scenario]]\nkind = \"gammalemma\"\nparams = {{ gamma_weights = [100, 1000] }}\n",
            out.display().to_string()
        ),
    )
    .unwrap();
    let o = quelab(&dir.path().join("cache"), &["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.contains("vertical\tTREND-ONLY"));
    assert!(s.contains("gammalemma\tPASS"));
    let plot = fs::read_to_string(out.join("vertical.plot.csv")).unwrap();
    assert!(plot.starts_with("x,y\n12,"));
    assert!(out.join("gammalemma.csv").exists());
    fs::write(&cfg, "precision_bits = 64\n").unwrap();
    assert_eq!(quelab(dir.path(), &["sweep", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn concurrent_sweeps_share_a_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let children: Vec<_> = (0..4)
        .map(|i| {
            let out = dir.path().join(format!("r{i}"));
            let cfg = dir.path().join(format!("c{i}.toml"));
            fs::write(
                &cfg,
                format!(
                    "out_dir = {:?}\n[[scenario]]\nkind = \"vertical\"\nparams = {{ weights = [24, 28, 32] }}\n",
                    out.display().to_string()
                ),
            )
            .unwrap();
            Command::new(env!("CARGO_BIN_EXE_quelab"))
                .args(["sweep", "--config", cfg.to_str().unwrap()])
                .env("QUELAB_CACHE_DIR", &cache)
                .stdout(Stdio::null())
                .spawn()
                .unwrap()
        })
        .collect();
    for mut c in children {
        assert!(c.wait().unwrap().success());
    }
    let first = fs::read(dir.path().join("r0/vertical.json")).unwrap();
    for i in 1..4 {
        assert_eq!(fs::read(dir.path().join(format!("r{i}/vertical.json"))).unwrap(), first);
    }
    let c = Cache::open(&cache).unwrap();
    for e in fs::read_dir(&cache).unwrap() {
        let name = e.unwrap().file_name().into_string().unwrap();
        assert!(name.ends_with(".json"), "stray file {name}");
    }
    let b = c.basis(24, quelab_core::massmeasure::norm_ncoeffs(24, 2.0).unwrap().max(
        quelab_core::massmeasure::strip_ncoeffs(24, 1.0).unwrap()), 256);
    assert!(b.is_ok());
    assert_eq!(c.stats().2, 0);
}
