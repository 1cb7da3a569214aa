//! Property tests for the invariants of each module. Inputs are drawn by
//! proptest (domain index, seeds, scalars); points come from the seeded
//! samplers so every case stays inside the intended domain.

use proptest::prelude::*;

use dsq_core::domain::LinearBound;
use dsq_core::fridman::fridman_lower_bound;
use dsq_core::metrics::{caratheodory_sandwich, model_distance};
use dsq_core::minkowski::{d_minkowski, sublevel_membership};
use dsq_core::sampling::{interior_point, stream_rng};
use dsq_core::squeeze::{certify_lower_bound, punctured_value, MapFamily};
use dsq_core::{Bracket, DomainSpec, FridmanFamily, MultiIndex, Point, SearchBudget, Sublevel, C64};

const TOL: f64 = 1e-10;

fn mi(w: &[u32]) -> MultiIndex {
    MultiIndex::new(w.to_vec()).unwrap()
}

fn catalog() -> Vec<(DomainSpec, MultiIndex)> {
    vec![
        (DomainSpec::disk(), mi(&[1])),
        (DomainSpec::ball(2).unwrap(), mi(&[1, 1])),
        (DomainSpec::polydisk(2).unwrap(), mi(&[1, 2])),
        (DomainSpec::polydisk(3).unwrap(), mi(&[2, 1, 3])),
        (DomainSpec::ellipsoid(vec![1, 2]).unwrap(), mi(&[2, 1])),
        (DomainSpec::ellipsoid(vec![2, 3]).unwrap(), mi(&[3, 2])),
        (
            DomainSpec::product(vec![DomainSpec::ellipsoid(vec![1, 2]).unwrap(), DomainSpec::disk()]).unwrap(),
            mi(&[2, 1, 1]),
        ),
        (
            DomainSpec::halfspaces(
                2,
                vec![
                    LinearBound { c: Point::from_real(&[1.0, 0.5]), b: 1.0 },
                    LinearBound { c: Point(vec![C64::new(0.0, 1.0), C64::new(1.0, 0.0)]), b: 2.0 },
                ],
            )
            .unwrap(),
            mi(&[2, 2]),
        ),
        (DomainSpec::scale(1.5, DomainSpec::polydisk(2).unwrap()).unwrap(), mi(&[1, 2])),
    ]
}

fn point(domain: &DomainSpec, seed: u64, near: f64) -> Point {
    Point(interior_point(domain, near, &mut stream_rng(seed, 0)))
}

fn lambda(re: f64, im: f64) -> C64 {
    let l = C64::new(re, im);
    if l.norm() > 1.0 { l / l.norm() } else { l }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn weighted_balanced_domains_are_closed_under_the_action(i in 0usize..9, seed in any::<u64>(),
                                                            re in -1.0f64..1.0, im in -1.0f64..1.0) {
        let (dom, d) = &catalog()[i];
        prop_assume!(dom.is_d_balanced(d));
        let z = point(dom, seed, 0.3);
        prop_assert!(dom.contains(&z.weighted(d, lambda(re, im)).0));
    }

    #[test]
    fn convex_domains_contain_segments(i in 0usize..9, s1 in any::<u64>(), s2 in any::<u64>(), a in 0.0f64..=1.0) {
        let (dom, _) = &catalog()[i];
        prop_assume!(dom.is_convex());
        let z = point(dom, s1, 0.3);
        let w = point(dom, s2, 0.3);
        let mix: Vec<C64> = z.0.iter().zip(&w.0).map(|(x, y)| x * a + y * (1.0 - a)).collect();
        prop_assert!(dom.contains(&mix));
    }

    #[test]
    fn bound_radius_is_sound(i in 0usize..9, seed in any::<u64>()) {
        let (dom, _) = &catalog()[i];
        let z = point(dom, seed, 0.5);
        prop_assert!(z.norm() < dom.bound_radius());
    }

    #[test]
    fn puncture_only_removes_the_origin(i in 0usize..9, seed in any::<u64>(), s in 0.0f64..2.0) {
        let (dom, _) = &catalog()[i];
        let p = DomainSpec::punctured(dom.clone()).unwrap();
        prop_assert!(!p.contains(&vec![C64::new(0.0, 0.0); dom.dim()]));
        let z = point(dom, seed, 0.0).scaled(s);
        if !z.is_origin() {
            prop_assert_eq!(p.contains(&z.0), dom.contains(&z.0));
        }
    }

    #[test]
    fn gauge_is_weighted_homogeneous(i in 0usize..9, seed in any::<u64>(), s in 0.1f64..3.0,
                                     re in -1.0f64..1.0, im in -1.0f64..1.0) {
        let (dom, d) = &catalog()[i];
        let z = point(dom, seed, 0.0).scaled(s);
        let lam = lambda(re, im);
        let lhs = d_minkowski(dom, d, &z.weighted(d, lam), TOL).unwrap();
        let rhs = d_minkowski(dom, d, &z, TOL).unwrap().scaled(lam.norm());
        prop_assert!(lhs.separation(&rhs) <= 2.0 * TOL, "{lhs:?} vs {rhs:?}");
    }

    #[test]
    fn balanced_gauge_scales_linearly(i in 0usize..9, seed in any::<u64>(), r in 0.01f64..1.0) {
        let (dom, _) = &catalog()[i];
        prop_assume!(dom.is_balanced());
        let ones = MultiIndex::ones(dom.dim());
        let z = point(dom, seed, 0.0);
        let lhs = d_minkowski(dom, &ones, &z.scaled(r), TOL).unwrap();
        let rhs = d_minkowski(dom, &ones, &z, TOL).unwrap().scaled(r);
        prop_assert!(lhs.separation(&rhs) <= 2.0 * TOL);
    }

    #[test]
    fn triangle_type_bound(i in 0usize..9, s1 in any::<u64>(), s2 in any::<u64>(), a in 0.0f64..=1.0,
                           k in 0.1f64..2.0) {
        let (dom, d) = &catalog()[i];
        prop_assume!(dom.is_convex() && dom.is_d_balanced(d));
        let z = point(dom, s1, 0.0).scaled(k);
        let w = point(dom, s2, 0.0);
        let mix = Point(z.0.iter().zip(&w.0).map(|(x, y)| x * a + y * (1.0 - a)).collect());
        let lhs = d_minkowski(dom, d, &mix, TOL).unwrap().lo;
        let rhs = d_minkowski(dom, d, &z, TOL).unwrap().hi + d_minkowski(dom, d, &w, TOL).unwrap().hi;
        prop_assert!(lhs <= rhs + 2.0 * TOL);
    }

    #[test]
    fn product_sublevels_factor(s1 in any::<u64>(), r in 0.05f64..1.0, k in 0.2f64..1.5) {
        let e = DomainSpec::ellipsoid(vec![1, 2]).unwrap();
        let pd = DomainSpec::polydisk(2).unwrap();
        let prod = DomainSpec::product(vec![e.clone(), pd.clone()]).unwrap();
        let d = mi(&[2, 1, 1, 3]);
        let z = point(&prod, s1, 0.0).scaled(k);
        let whole = sublevel_membership(&prod, &d, r, &z, TOL).unwrap();
        let a = sublevel_membership(&e, &mi(&[2, 1]), r, &Point(z.0[..2].to_vec()), TOL).unwrap();
        let b = sublevel_membership(&pd, &mi(&[1, 3]), r, &Point(z.0[2..].to_vec()), TOL).unwrap();
        let decided = |s: Sublevel| s != Sublevel::Undecided;
        if decided(whole) && decided(a) && decided(b) {
            prop_assert_eq!(whole == Sublevel::Inside, a == Sublevel::Inside && b == Sublevel::Inside);
        }
    }

    #[test]
    fn sublevel_members_appear_in_the_exhaustion(i in 0usize..9, seed in any::<u64>(), r in 0.1f64..1.0) {
        let (dom, d) = &catalog()[i];
        let z = point(dom, seed, 0.0);
        if sublevel_membership(dom, d, r, &z, TOL).unwrap() == Sublevel::Inside {
            let found = (1..=50).map(|k| r * (1.0 - 0.5f64.powi(k)))
                .any(|rk| sublevel_membership(dom, d, rk, &z, TOL).unwrap() == Sublevel::Inside);
            prop_assert!(found);
        }
    }

    #[test]
    fn sandwich_contains_exact_polydisk_distance(seed in any::<u64>(), j in 0usize..3) {
        let pd = DomainSpec::polydisk(2).unwrap();
        let d = [mi(&[1, 2]), mi(&[2, 1]), mi(&[2, 3])][j].clone();
        let z = point(&pd, seed, 0.0);
        let exact = model_distance(&pd, &Point::zeros(2), &z).unwrap().distance;
        let b = caratheodory_sandwich(&pd, &d, &z, TOL).unwrap();
        prop_assert!(b.lo <= exact + 2.0 * TOL && exact <= b.hi + 2.0 * TOL);
    }

    #[test]
    fn sandwich_widens_with_weight_and_collapses_when_balanced(seed in any::<u64>()) {
        let pd = DomainSpec::polydisk(2).unwrap();
        let z = point(&pd, seed, 0.0);
        // the same gauge value under d = (1,1) and d = (1,1) scaled up in L
        let b1 = caratheodory_sandwich(&pd, &mi(&[1, 1]), &z, TOL).unwrap();
        prop_assert!(b1.width() <= 1e-8 / (1.0 - z.0.iter().map(|c| c.norm()).fold(0.0, f64::max)).max(1e-3));
        let h = d_minkowski(&pd, &mi(&[1, 2]), &z, TOL).unwrap().mid();
        let widths: Vec<f64> = (1..5).map(|l| (h.min(1.0 - 1e-15)).atanh() - h.powi(l).atanh()).collect();
        prop_assert!(widths.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn model_distance_is_a_metric(i in 0usize..3, s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let dom = [DomainSpec::disk(), DomainSpec::polydisk(2).unwrap(), DomainSpec::ball(2).unwrap()][i].clone();
        let (x, y, z) = (point(&dom, s1, 0.0), point(&dom, s2, 0.0), point(&dom, s3, 0.0));
        let dist = |a: &Point, b: &Point| model_distance(&dom, a, b).unwrap().distance;
        let (xy, yx) = (dist(&x, &y), dist(&y, &x));
        prop_assert!((xy - yx).abs() <= 1e-9 * (1.0 + xy));
        prop_assert!(dist(&x, &z) <= xy + dist(&y, &z) + 1e-9);
    }
}

proptest! {
    // map searches are costly; fewer cases
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn squeezing_certificates_replay_and_respect_upper_values(i in 0usize..3, seed in any::<u64>()) {
        let (om, d) = [
            (DomainSpec::disk(), mi(&[1])),
            (DomainSpec::polydisk(2).unwrap(), mi(&[1, 2])),
            (DomainSpec::ball(2).unwrap(), mi(&[1, 1])),
        ][i].clone();
        let pd = DomainSpec::punctured(om.clone()).unwrap();
        let z = point(&pd, seed, 0.0);
        prop_assume!(z.norm() > 1e-3);
        let budget = SearchBudget { seed, ..SearchBudget::default() };
        let cert = certify_lower_bound(&pd, &om, &d, &z, MapFamily::Auto, &budget).unwrap();
        prop_assert!(cert.radius > 0.0 && cert.radius <= 1.0);
        let v = punctured_value(&om, &d, &z, TOL).unwrap();
        prop_assert!(cert.radius <= v.hi + cert.eps_cov + v.width());
        let (img, cov) = cert.replay(512, seed.wrapping_add(1));
        prop_assert_eq!(img.failures + cov.failures, 0);
    }

    #[test]
    fn rescaling_the_source_keeps_the_radius(seed in any::<u64>(), a in 0.3f64..0.9) {
        let disk = DomainSpec::disk();
        let pd = DomainSpec::punctured(disk.clone()).unwrap();
        let scaled = DomainSpec::punctured(DomainSpec::scale(a, disk.clone()).unwrap()).unwrap();
        let z = point(&pd, seed, 0.0);
        prop_assume!(z.norm() > 0.05);
        let budget = SearchBudget::default();
        let one = mi(&[1]);
        let r = certify_lower_bound(&pd, &disk, &one, &z, MapFamily::Moebius, &budget).unwrap().radius;
        let rs = certify_lower_bound(&scaled, &disk, &one, &z.scaled(a), MapFamily::Moebius, &budget).unwrap().radius;
        prop_assert!((r - rs).abs() < 1e-3, "{r} vs {rs}");
    }

    #[test]
    fn fridman_certificates_replay_and_stay_below_one(seed in any::<u64>(), m in 0.05f64..0.95) {
        let disk = DomainSpec::disk();
        let pd = DomainSpec::punctured(disk.clone()).unwrap();
        let a = Point(vec![C64::from_polar(m, seed as f64)]);
        let budget = SearchBudget { seed, ..SearchBudget::default() };
        let c = fridman_lower_bound(&pd, &disk, &a, &FridmanFamily::ChartScale, &budget).unwrap();
        prop_assert!(c.tanh_radius <= 1.0);
        // the squeezing value of the punctured disk is |a|; equality corridor at L = 1
        prop_assert!((c.tanh_radius - m).abs() <= 1e-3);
        prop_assert_eq!(c.replay(500, seed ^ 0xabc).unwrap().failures, 0);
        let b = Bracket::exact(m);
        prop_assert!(b.contains(c.tanh_radius, 1e-3));
    }
}
