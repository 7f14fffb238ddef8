//! Property-based invariants: flux conservation and mirror reciprocity for
//! arbitrary valid potentials, quadrature convergence order, norm
//! preservation of the unitary band operations.

use num_complex::Complex64;
use proptest::prelude::*;

use bandtime::band::{BandGrid, Channel, ChannelAmplitude, GaugePhase};
use bandtime::scattering::{amplitudes, Delta, PotentialSpec, Segment};
use bandtime::timeop::{energy_shift, evolve};

fn arb_potential() -> impl Strategy<Value = PotentialSpec> {
    let deltas = prop::collection::vec((-8.0f64..8.0, -2.0f64..2.0), 0..4).prop_map(|raw| {
        let mut pos: Vec<f64> = raw.iter().map(|d| d.0).collect();
        pos.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pos.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        pos.iter()
            .zip(raw.iter())
            .map(|(&position, &(_, strength))| Delta { position, strength })
            .collect::<Vec<_>>()
    });
    let segments = prop::collection::vec((-8.0f64..4.0, 0.05f64..4.0, -1.0f64..1.0), 0..3)
        .prop_map(|raw| {
            let mut segs: Vec<Segment> = Vec::new();
            let mut cursor = f64::NEG_INFINITY;
            let mut sorted = raw;
            sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            for (start, width, height) in sorted {
                let start = start.max(cursor);
                let end = start + width;
                segs.push(Segment {
                    start,
                    end,
                    height,
                });
                cursor = end;
            }
            segs
        });
    (deltas, segments)
        .prop_map(|(d, s)| PotentialSpec::new(d, s).expect("constructed sorted and disjoint"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flux_is_conserved_for_arbitrary_potentials(
        potential in arb_potential(),
        eps in 0.05f64..3.0,
    ) {
        let s = amplitudes(&potential, eps).unwrap();
        prop_assert!(
            (s.flux() - 1.0).abs() < 1e-10,
            "flux {} at eps={eps}", s.flux()
        );
    }

    #[test]
    fn transmission_is_mirror_invariant(
        potential in arb_potential(),
        eps in 0.05f64..3.0,
    ) {
        // t is the same from either side of any real potential
        let t1 = amplitudes(&potential, eps).unwrap().transmission;
        let t2 = amplitudes(&potential.mirrored(), eps).unwrap().transmission;
        prop_assert!(
            (t1 - t2).norm() <= 1e-10 * t1.norm().max(1e-300),
            "mirror reciprocity violated: {t1} vs {t2}"
        );
    }

    #[test]
    fn unitary_band_operations_preserve_norm(
        re in prop::collection::vec(-1.0f64..1.0, 6),
        im in prop::collection::vec(-1.0f64..1.0, 6),
        dt in -200.0f64..200.0,
        x0 in -100.0f64..100.0,
        steps in -300i64..300,
    ) {
        let grid = BandGrid::new(0.2, 0.4, 201).unwrap();
        let n = grid.len();
        let samples: Vec<Complex64> = (0..n)
            .map(|i| {
                let y = std::f64::consts::PI * i as f64 / (n - 1) as f64;
                (0..6)
                    .map(|k| Complex64::new(re[k], im[k]) * ((k + 1) as f64 * y).sin())
                    .sum()
            })
            .collect();
        let g = ChannelAmplitude::new(grid, Channel::Right, samples).unwrap();
        prop_assume!(g.norm() > 1e-6);
        let g = g.normalized().unwrap();

        let gauge = GaugePhase::spatial_arrival(grid, x0);
        let evolved = evolve(&g, dt);
        prop_assert!((evolved.norm() - 1.0).abs() < 1e-10);

        let shifted = energy_shift(&g, &gauge, steps).unwrap();
        let back = energy_shift(&shifted, &gauge, -steps).unwrap();
        for (a, b) in back.samples().iter().zip(g.samples()) {
            prop_assert!((a - b).norm() < 1e-10);
        }

        let transformed = bandtime::band::gauge_transform(&g, &gauge).unwrap();
        for (a, b) in transformed.samples().iter().zip(g.samples()) {
            prop_assert!((a.norm() - b.norm()).abs() < 1e-12);
        }
    }
}

/// Composite Simpson converges as N^-4 on smooth integrands.
#[test]
fn simpson_error_scales_fourth_order() {
    let exact = {
        // int_0.2^0.6 e^x sin(3x) dx via antiderivative
        let f = |x: f64| (x.exp() / 10.0) * ((3.0 * x).sin() - 3.0 * (3.0 * x).cos());
        f(0.6) - f(0.2)
    };
    let mut errors = Vec::new();
    for n in [51usize, 101, 201, 401] {
        let grid = BandGrid::new(0.2, 0.4, n).unwrap();
        let samples: Vec<f64> = grid.energies().map(|x| x.exp() * (3.0 * x).sin()).collect();
        errors.push((grid.integrate_real(&samples).unwrap() - exact).abs());
    }
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!(
            ratio > 12.0 && ratio < 20.0,
            "halving the spacing should cut the error ~16x, got {ratio:.2} ({errors:?})"
        );
    }
}

/// The arrival-time width saturates once the band is fully under the
/// barrier, becoming insensitive to the height u. (At u = 0.55 the band
/// still straddles the barrier top, so the width there is genuinely
/// larger; see the acceptance criterion 12 diagnostics.)
#[test]
fn arrival_width_saturates_under_the_barrier() {
    use bandtime::arrival::{arrival_analysis, GaugeKind, Scenario};
    use bandtime::timeop::DistributionOptions;

    let width = |u: f64| {
        let s = Scenario::new(
            PotentialSpec::double_delta_barrier(1.0, 10.0, u).unwrap(),
            BandGrid::new(0.2, 0.4, 1601).unwrap(),
            100.0,
            0.0,
            GaugeKind::Constant,
            DistributionOptions {
                tail_tol: 1e-9,
                m_cap: 1 << 14,
            },
        )
        .unwrap();
        arrival_analysis(&s).unwrap().std_dev
    };
    let d60 = width(0.60);
    let d65 = width(0.65);
    let d70 = width(0.70);
    assert!((d60 - d65).abs() / d65 < 0.15, "dtau(0.60)={d60} vs dtau(0.65)={d65}");
    assert!((d70 - d65).abs() / d65 < 0.15, "dtau(0.70)={d70} vs dtau(0.65)={d65}");
}
