use proptest::prelude::*;
use qrdm_core::{Algorithm, DenseMatrix};
use qrdm_harness::report::{compare_run, read_csv, write_csv, CompareOptions, ComparisonRow};
use qrdm_harness::GenSpec;

fn blank_times(csv: &str) -> String {
    csv.lines()
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            f[10] = "";
            f.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn small_set() -> Vec<(String, DenseMatrix)> {
    ["random:40:30:12:1e10", "kahan:20:0.2", "identity:8"]
        .iter()
        .map(|s| (s.to_string(), s.parse::<GenSpec>().unwrap().generate(7).unwrap()))
        .collect()
}

#[test]
fn identity_ratios_are_one() {
    let rows = compare_run(&[("I8".into(), DenseMatrix::identity(8))], &CompareOptions::default()).unwrap();
    assert_eq!(rows.iter().map(|r| r.algo).collect::<Vec<_>>(), [Algorithm::Qrp, Algorithm::Qrdm, Algorithm::Qrdm2]);
    for r in rows {
        assert_eq!((r.rank_oracle, r.rank_computed), (Some(8), 8));
        assert_eq!(r.ratio_d, Some((1.0, 1.0)));
        assert_eq!(r.ratio_s, Some((1.0, 1.0)));
    }
}

#[test]
fn reports_are_deterministic_apart_from_time() {
    let mats = small_set();
    let opts = CompareOptions { jobs: Some(2), ..CompareOptions::default() };
    let mut a = Vec::new();
    let mut b = Vec::new();
    write_csv(&compare_run(&mats, &opts).unwrap(), &mut a).unwrap();
    write_csv(&compare_run(&mats, &CompareOptions::default()).unwrap(), &mut b).unwrap();
    let (a, b) = (String::from_utf8(a).unwrap(), String::from_utf8(b).unwrap());
    assert_eq!(blank_times(&a), blank_times(&b));
    // rows follow input order
    let ids: Vec<&str> = a.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ids[0], "random:40:30:12:1e10");
    assert_eq!(ids[8], "identity:8");
}

#[test]
fn written_report_parses_back() {
    let rows = compare_run(&small_set(), &CompareOptions::default()).unwrap();
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).unwrap();
    assert_eq!(read_csv(buf.as_slice()).unwrap(), rows);
    assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
}

fn opt_pair() -> impl Strategy<Value = Option<(f64, f64)>> {
    prop::option::of((any::<f64>(), any::<f64>()).prop_filter("finite", |(a, b)| a.is_finite() && b.is_finite()))
}

proptest! {
    #[test]
    fn csv_round_trip_is_exact(
        rank_oracle in prop::option::of(0usize..10_000),
        rank_computed in 0usize..10_000,
        ratio_d in opt_pair(),
        ratio_s in opt_pair(),
        time_s in 0.0f64..1e4,
        mean_ks in 0.0f64..64.0,
        breaks in 0usize..100,
        fallbacks in 0usize..100,
        flags in prop::collection::vec("[a-z_]{1,12}", 0..3),
        algo in prop::sample::select(vec![Algorithm::Qrp, Algorithm::Qrdm, Algorithm::Qrdm2]),
    ) {
        let row = ComparisonRow {
            matrix: "m,with \"quotes\"".into(),
            algo,
            m: 7,
            n: 5,
            rank_oracle,
            rank_computed,
            ratio_d,
            ratio_s,
            time_s,
            mean_ks,
            breaks,
            fallbacks,
            flags,
        };
        let mut buf = Vec::new();
        write_csv(std::slice::from_ref(&row), &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.len(), 1);
        prop_assert_eq!(&back[0], &row);
    }
}
