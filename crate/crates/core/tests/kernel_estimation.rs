use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use se2group::kernel::{estimate_gamma, symmetrize};
use se2group::se2::inverse;
use se2group::*;

/// Doubling the number of paths halves the variance of a bin estimate.
#[test]
fn monte_carlo_variance_halves_with_twice_the_paths() {
    let spec = GridSpec::centered(100.0, 41, 32);
    let reps = 30u64;
    let estimates = |n_paths: usize, offset: u64| -> Vec<Vec<f64>> {
        (0..reps)
            .map(|r| {
                let p = FpParams {
                    n_paths,
                    seed: offset + r,
                    ..FpParams::default()
                };
                estimate_gamma(&p, &spec).unwrap().grid.values().to_vec()
            })
            .collect()
    };
    let small = estimates(1000, 1_000);
    let large = estimates(2000, 2_000);

    // pool the variance over well-populated bins away from the source
    let mean_small: Vec<f64> = (0..small[0].len())
        .map(|i| small.iter().map(|e| e[i]).sum::<f64>() / reps as f64)
        .collect();
    let source = spec.bin_of(&CorticalPoint::IDENTITY).unwrap();
    let mut bins: Vec<usize> = (0..mean_small.len()).filter(|&i| i != source).collect();
    bins.sort_by(|&a, &b| mean_small[b].total_cmp(&mean_small[a]));
    bins.truncate(200);
    let var = |runs: &[Vec<f64>], i: usize| {
        let m = runs.iter().map(|e| e[i]).sum::<f64>() / reps as f64;
        runs.iter().map(|e| (e[i] - m).powi(2)).sum::<f64>() / (reps - 1) as f64
    };
    let vs: f64 = bins.iter().map(|&i| var(&small, i)).sum();
    let vl: f64 = bins.iter().map(|&i| var(&large, i)).sum();
    let ratio = vs / vl;
    // pooled over 200 bins of 30 replicates the ratio's sampling spread is a few percent
    assert!((1.6..2.5).contains(&ratio), "variance ratio {ratio}");
}

fn smooth_gamma(n_xy: usize, n_theta: usize) -> KernelGrid {
    let spec = GridSpec::centered(40.0, n_xy, n_theta);
    let mut values = vec![0.0; spec.len()];
    for (idx, v) in values.iter_mut().enumerate() {
        let c = spec.center(idx);
        let dt = c.theta.sin();
        // off-centre, anisotropic and tilted so that Γ(η) ≠ Γ(η⁻¹)
        let (u, w) = (c.x - 8.0 - 0.2 * c.y, c.y - 3.0);
        *v = (-(u * u) / 200.0 - (w * w) / 60.0 - dt * dt / 0.5 - 0.3 * c.theta.cos()).exp();
    }
    KernelGrid::from_values(spec, values).unwrap()
}

fn max_asymmetry(omega: &KernelGrid, rng: &mut ChaCha8Rng) -> f64 {
    (0..1000)
        .map(|_| {
            let eta = CorticalPoint::new(
                rng.random_range(-20.0..20.0),
                rng.random_range(-20.0..20.0),
                rng.random_range(-1.0..1.0),
            );
            (omega.value_at(&eta) - omega.value_at(&inverse(&eta))).abs()
        })
        .fold(0.0, f64::max)
}

/// After symmetrisation ω₀(η) and ω₀(η⁻¹) agree up to interpolation error,
/// which falls off quadratically with the bin width.
#[test]
fn symmetrised_grid_is_symmetric_to_interpolation_order() {
    let coarse = symmetrize(&smooth_gamma(41, 32)).unwrap();
    let fine = symmetrize(&smooth_gamma(81, 64)).unwrap();
    let (e_coarse, e_fine) = (
        max_asymmetry(&coarse, &mut ChaCha8Rng::seed_from_u64(1)),
        max_asymmetry(&fine, &mut ChaCha8Rng::seed_from_u64(1)),
    );
    assert!(e_fine < 0.5 * e_coarse, "{e_coarse} -> {e_fine}");
    assert!(e_fine < 0.01, "{e_fine}");
    // the unsymmetrised field is far from symmetric
    let raw = smooth_gamma(81, 64);
    assert!(max_asymmetry(&raw, &mut ChaCha8Rng::seed_from_u64(1)) > 100.0 * e_fine);
}

#[test]
fn estimated_kernel_favours_the_x_axis() {
    let k = estimate_kernel(&KernelConfig::default()).unwrap();
    let spec = k.gamma.spec();
    let r = 0.2 * (spec.x_range.1 - spec.x_range.0);
    assert!(k.gamma.anisotropy_ratio(r) > 2.0);
    let (cx, cy) = k.summary.gamma_center_of_mass;
    assert!(cx > 0.0 && cy.abs() < 0.05 * cx);
    assert!(k.summary.out_of_range_fraction < 0.05);
}

#[test]
fn diffusive_scaling_coincides_with_linear_at_unit_step() {
    let spec = GridSpec::centered(100.0, 31, 16);
    let lin = FpParams {
        n_paths: 300,
        ..FpParams::default()
    };
    let dif = FpParams {
        noise_scaling: NoiseScaling::Diffusive,
        ..lin
    };
    assert_eq!(
        estimate_gamma(&lin, &spec).unwrap().grid,
        estimate_gamma(&dif, &spec).unwrap().grid
    );
    let lin = FpParams {
        step_ds: 0.5,
        n_steps: 200,
        ..lin
    };
    let dif = FpParams {
        noise_scaling: NoiseScaling::Diffusive,
        ..lin
    };
    assert_ne!(
        estimate_gamma(&lin, &spec).unwrap().grid,
        estimate_gamma(&dif, &spec).unwrap().grid
    );
}
