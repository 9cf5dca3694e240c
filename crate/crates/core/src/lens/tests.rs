use super::*;
use crate::flow::{trace, PhasePoint, TraceLimits};
use crate::geometry::{Obstacle, Scene};
use crate::Vec3;
use std::f64::consts::PI;

fn sphere(r: f64, dim: usize) -> Scene {
    Scene::new("sphere", dim, 10.0, vec![Obstacle::sphere(Vec3::zeros(), r, dim)]).unwrap()
}

fn empty(dim: usize) -> Scene {
    Scene::new("empty", dim, 10.0, vec![]).unwrap()
}

#[test]
fn empty_scene_gives_chords() {
    for (dim, spec) in [(2, SampleSpec::grid(6, 5, 10.0)), (3, SampleSpec::grid(10, 8, 10.0))] {
        let t = build_lens_table(&empty(dim), &spec);
        assert_eq!(t.samples.len(), spec.count());
        let entries = sample_phase_sphere(&spec, 10.0, dim);
        for (s, e) in t.samples.iter().zip(&entries) {
            assert_eq!(s.status, SampleStatus::Free);
            let chord = 2.0 * 10.0 * e.point.v.dot(&(-e.point.q / 10.0));
            assert!((s.t.unwrap() - chord).abs() < 1e-9 * 10.0);
            assert_eq!(s.reflections, 0);
        }
    }
}

#[test]
fn scattered_fraction_matches_the_shadow() {
    // a ray from S0 hits the centred sphere iff its angle to the inward
    // normal is below asin(r/a)
    let alpha = (1.0f64 / 10.0).asin();
    let d2 = 400;
    let t = build_lens_table(&sphere(1.0, 2), &SampleSpec::grid(8, d2, 10.0));
    let frac = t.summary().scattered as f64 / t.samples.len() as f64;
    let oracle = 2.0 * alpha / PI;
    assert!((frac - oracle).abs() <= 1.0 / d2 as f64, "{frac} vs {oracle}");

    let d3 = 2000;
    let t = build_lens_table(&sphere(1.0, 3), &SampleSpec::grid(2, d3, 10.0));
    let frac = t.summary().scattered as f64 / t.samples.len() as f64;
    let oracle = 1.0 - alpha.cos();
    assert!((frac - oracle).abs() <= 3.0 / d3 as f64, "{frac} vs {oracle}");
}

#[test]
fn tables_are_deterministic_and_round_trip() {
    let spec = SampleSpec::new(SampleMode::MonteCarlo { count: 300 }, 11, 10.0);
    let s = sphere(2.0, 3);
    let a = build_lens_table(&s, &spec);
    let b = build_lens_table(&s, &spec);
    let extra = serde_json::Map::new();
    assert_eq!(a.to_jsonl(&extra), b.to_jsonl(&extra));
    let back = LensTable::from_jsonl(&a.to_jsonl(&extra)).unwrap();
    assert_eq!(back, a);
    assert_eq!(a.to_csv().lines().count(), 301);
    assert!(a.to_csv().starts_with("index,polar,azimuth,alpha,beta,status,t,reflections,theta_0,theta_1,theta_2,sojourn"));
}

#[test]
fn scattered_samples_are_reversible() {
    let s = Scene::new(
        "pair",
        2,
        10.0,
        vec![Obstacle::sphere(Vec3::new(-2.0, 0.5, 0.0), 1.0, 2), Obstacle::sphere(Vec3::new(2.0, -0.5, 0.0), 1.5, 2)],
    )
    .unwrap();
    let t = build_lens_table(&s, &SampleSpec::grid(40, 40, 10.0));
    let mut checked = 0;
    for x in t.samples.iter().filter(|x| x.status == SampleStatus::Scattered) {
        let (e, th) = (x.exit.as_ref().unwrap(), x.theta.as_ref().unwrap());
        let back = PhasePoint::new(Vec3::new(e[0], e[1], 0.0), -Vec3::new(th[0], th[1], 0.0));
        let r = trace(&s, &back, &TraceLimits::for_radius(10.0)).unwrap();
        assert!((r.total_time() - x.t.unwrap()).abs() < 1e-7 * 10.0);
        checked += 1;
    }
    assert!(checked > 50);
}

#[test]
fn larger_sphere_casts_a_larger_shadow() {
    let spec = SampleSpec::grid(12, 60, 10.0);
    let mut last = 0;
    for r in [0.5, 1.0, 1.01, 1.5, 3.0] {
        let n = build_lens_table(&sphere(r, 2), &spec).summary().scattered;
        assert!(n >= last, "r = {r}");
        last = n;
    }
}

#[test]
fn self_comparison_is_clean() {
    let t = build_lens_table(&sphere(1.0, 3), &SampleSpec::grid(20, 20, 10.0));
    let r = compare_lens(&t, &t, TIME_TOLERANCE * 10.0).unwrap();
    assert_eq!(r.verdict, Verdict::Indistinguishable);
    assert_eq!(r.max_abs_dt, 0.0);
    assert_eq!((r.status_mismatches, r.reflection_mismatches, r.exceed_count), (0, 0, 0));
}

#[test]
fn radius_change_is_visible() {
    let spec = SampleSpec::grid(16, 41, 10.0);
    let k = build_lens_table(&sphere(1.0, 2), &spec);
    let l = build_lens_table(&sphere(1.01, 2), &spec);
    let r = compare_lens(&k, &l, TIME_TOLERANCE * 10.0).unwrap();
    assert_eq!(r.verdict, Verdict::Distinguishable);
    assert!(r.max_abs_dt >= 0.02 * (1.0 - 1e-9), "{}", r.max_abs_dt);
    // exceed fraction never grows with the tolerance
    let mut prev = f64::INFINITY;
    for tol in [0.0, 1e-6, 1e-3, 5e-3, 1e-2, 0.02, 1.0] {
        let f = compare_lens(&k, &l, tol).unwrap().exceed_fraction;
        assert!(f <= prev);
        prev = f;
    }
    let other = build_lens_table(&sphere(1.0, 2), &SampleSpec::grid(16, 40, 10.0));
    assert!(matches!(compare_lens(&k, &other, 1e-5), Err(LensError::SpecMismatch(_))));
}

#[test]
fn hausdorff_of_concentric_spheres() {
    let (k, l) = (sphere(1.0, 3), sphere(1.01, 3));
    assert_eq!(boundary_distance(&k, &k, 500).unwrap(), 0.0);
    assert!((boundary_distance(&k, &l, 500).unwrap() - 0.01).abs() < 1e-3);
    assert!(boundary_distance(&k, &sphere(1.0, 2), 10).is_err());
}

#[test]
fn backscatter_spectrum_has_one_bin() {
    let s = sphere(1.0, 3);
    let w = Vec3::new(1.0, 2.0, -0.5).normalize();
    let opts = SpectrumOptions::new(10.0, 3);
    let bins = scattering_spectrum(&s, &w, &(-w), &opts, &TraceLimits::for_radius(10.0)).unwrap();
    assert_eq!(bins.len(), 1, "{bins:?}");
    assert!((bins[0].sojourn + 2.0).abs() < 1e-4);

    let e = empty(2);
    let w = Vec3::new(0.6, 0.8, 0.0);
    let opts = SpectrumOptions::new(10.0, 2);
    let bins = scattering_spectrum(&e, &w, &w, &opts, &TraceLimits::for_radius(10.0)).unwrap();
    assert_eq!(bins.len(), 1);
    assert!(bins[0].sojourn.abs() < 1e-9);
    let none = scattering_spectrum(&e, &w, &Vec3::new(0.8, 0.6, 0.0), &opts, &TraceLimits::for_radius(10.0)).unwrap();
    assert!(none.is_empty());
}

#[test]
fn trapped_estimates() {
    let ladder: Vec<SampleSpec> = [(10, 10), (20, 50), (50, 200)].iter().map(|&(p, d)| SampleSpec::grid(p, d, 10.0)).collect();
    let est = estimate_trapped(&sphere(1.0, 3), &ladder).unwrap();
    assert!(est.levels.iter().all(|l| l.trapped == 0 && l.cluster_radius == 0.0));
    assert!(est.non_increasing);
    assert!(estimate_trapped(&sphere(1.0, 3), &ladder[..2]).is_err());
}
