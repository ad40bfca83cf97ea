//! Independent oracles shared by the integration tests: dense matrices built
//! straight from the operator definitions, naive direct-sum convolutions and
//! a derivative-free minimizer for the 2-vector prox objectives.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use panfuse::metrics::{evaluate, EvaluationInputs};
use panfuse::sim::{blur_and_decimate, degrade_hx, degrade_pan, piecewise_constant_scene, SceneSpec, SimScenario};
use panfuse::solver::SplitState;
use panfuse::{HyperCube, PanSharpener, Plane, Psf, SensorModel, SolverConfig, SplitVector, VectorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn random_plane(rng: &mut impl Rng, w: usize, h: usize) -> Plane {
    Plane::new(w, h, random_vec(rng, w * h)).unwrap()
}

pub fn random_cube(rng: &mut impl Rng, w: usize, h: usize, l: usize) -> HyperCube {
    HyperCube::new(w, h, l, random_vec(rng, w * h * l)).unwrap()
}

pub fn random_field(rng: &mut impl Rng, w: usize, h: usize) -> VectorField {
    VectorField::new(w, h, random_vec(rng, w * h), random_vec(rng, w * h)).unwrap()
}

pub fn random_split(rng: &mut impl Rng, w: usize, h: usize, l: usize) -> SplitVector {
    SplitVector {
        tv: (0..l).map(|_| random_field(rng, w, h)).collect(),
        levelline: (0..l).map(|_| random_field(rng, w, h)).collect(),
        blur: random_cube(rng, w, h, l),
        spectral: random_cube(rng, w, h, l),
    }
}

/// Random unit-sum PSF with a random footprint and origin.
pub fn random_psf(rng: &mut impl Rng) -> Psf {
    let (pw, ph) = (rng.random_range(1..4), rng.random_range(1..4));
    let mut w: Vec<f64> = (0..pw * ph).map(|_| rng.random_range(0.0..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    let origin = (rng.random_range(0..ph), rng.random_range(0..pw));
    Psf::new(pw, ph, origin, w).unwrap()
}

pub fn random_weights(rng: &mut impl Rng, l: usize) -> Vec<f64> {
    (0..l).map(|_| rng.random_range(0.0..1.0)).collect()
}

/// Flattening order of a split vector: tv fields (h then v) band by band,
/// level-line fields likewise, then the blur cube, then the spectral cube.
pub fn flatten(v: &SplitVector) -> Vec<f64> {
    let mut out = Vec::new();
    for f in v.tv.iter().chain(&v.levelline) {
        out.extend_from_slice(&f.h);
        out.extend_from_slice(&f.v);
    }
    out.extend_from_slice(v.blur.data());
    out.extend_from_slice(v.spectral.data());
    out
}

pub fn unflatten(data: &[f64], w: usize, h: usize, l: usize) -> SplitVector {
    let n = w * h;
    let mut k = 0;
    let mut take = |len: usize| {
        let s = data[k..k + len].to_vec();
        k += len;
        s
    };
    let mut fields = |count: usize| -> Vec<VectorField> {
        (0..count)
            .map(|_| {
                let fh = take(n);
                let fv = take(n);
                VectorField::new(w, h, fh, fv).unwrap()
            })
            .collect()
    };
    let tv = fields(l);
    let levelline = fields(l);
    let blur = HyperCube::new(w, h, l, take(n * l)).unwrap();
    let spectral = HyperCube::new(w, h, l, take(n * l)).unwrap();
    SplitVector {
        tv,
        levelline,
        blur,
        spectral,
    }
}

/// `[∂_h; ∂_v]` as a `2N × N` matrix, forward differences with wrap.
pub fn dense_gradient(w: usize, h: usize) -> DMatrix<f64> {
    let n = w * h;
    let mut m = DMatrix::zeros(2 * n, n);
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            m[(i, i)] -= 1.0;
            m[(i, r * w + (c + 1) % w)] += 1.0;
            m[(n + i, i)] -= 1.0;
            m[(n + i, ((r + 1) % h) * w + c)] += 1.0;
        }
    }
    m
}

/// Periodic convolution `(H u)(i) = Σ_a w_a u(i − offset_a)` as an `N × N` matrix.
pub fn dense_blur(psf: &Psf, w: usize, h: usize) -> DMatrix<f64> {
    let n = w * h;
    let mut m = DMatrix::zeros(n, n);
    for r in 0..h {
        for c in 0..w {
            for (dr, dc, wt) in psf.taps() {
                let sr = (r as isize - dr).rem_euclid(h as isize) as usize;
                let sc = (c as isize - dc).rem_euclid(w as isize) as usize;
                m[(r * w + c, sr * w + sc)] += wt;
            }
        }
    }
    m
}

/// Spectral circulant `(H_λ u)_l = Σ_k g_k u_{(l+k) mod L}` as an `LN × LN` matrix.
pub fn dense_spectral(g: &[f64], n: usize) -> DMatrix<f64> {
    let l = g.len();
    let mut m = DMatrix::zeros(l * n, l * n);
    for band in 0..l {
        for (k, &gk) in g.iter().enumerate() {
            let src = (band + k) % l;
            for i in 0..n {
                m[(band * n + i, src * n + i)] += gk;
            }
        }
    }
    m
}

/// Decimation keeping pixel `offset` of each `q × q` block.
pub fn dense_decimation(w: usize, h: usize, q: usize, offset: (usize, usize)) -> DMatrix<f64> {
    let (lw, lh) = (w / q, h / q);
    let mut m = DMatrix::zeros(lw * lh, w * h);
    for r in 0..lh {
        for c in 0..lw {
            m[(r * lw + c, (r * q + offset.0) * w + c * q + offset.1)] = 1.0;
        }
    }
    m
}

/// Panchromatic mixing `G` as an `N × LN` matrix.
pub fn dense_pan_mix(g: &[f64], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, g.len() * n);
    for (b, &gb) in g.iter().enumerate() {
        for i in 0..n {
            m[(i, b * n + i)] = gb;
        }
    }
    m
}

/// Stacked `M` with rows ordered as [`flatten`].
pub fn dense_m(model: &SensorModel, w: usize, h: usize) -> DMatrix<f64> {
    let l = model.bands();
    let n = w * h;
    let grad = dense_gradient(w, h);
    let blur = dense_blur(&model.psf, w, h);
    let spec = dense_spectral(&model.g, n);
    let rows = 2 * (2 * n * l) + n * l + n * l;
    let mut m = DMatrix::zeros(rows, n * l);
    let mut row = 0;
    for _ in 0..2 {
        for b in 0..l {
            m.view_mut((row, b * n), (2 * n, n)).copy_from(&grad);
            row += 2 * n;
        }
    }
    for b in 0..l {
        m.view_mut((row, b * n), (n, n)).copy_from(&blur);
        row += n;
    }
    m.view_mut((row, 0), (n * l, n * l)).copy_from(&spec);
    m
}

/// Least-squares `u = argmin ‖M u − r‖` via the normal equations, solved by SVD.
pub fn dense_least_squares(m: &DMatrix<f64>, r: &[f64]) -> Vec<f64> {
    let mtm = m.transpose() * m;
    let mtr = m.transpose() * DVector::from_column_slice(r);
    let svd = mtm.svd(true, true);
    svd.solve(&mtr, 1e-14).unwrap().as_slice().to_vec()
}

pub fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(v)).as_slice().to_vec()
}

/// Direct-sum periodic convolution.
pub fn naive_convolve(plane: &Plane, psf: &Psf) -> Vec<f64> {
    let (w, h) = (plane.width(), plane.height());
    let mut out = vec![0.0; w * h];
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0;
            for (dr, dc, wt) in psf.taps() {
                let sr = (r as isize - dr).rem_euclid(h as isize) as usize;
                let sc = (c as isize - dc).rem_euclid(w as isize) as usize;
                acc += wt * plane.get(sr, sc);
            }
            out[r * w + c] = acc;
        }
    }
    out
}

/// Direct-sum spectral circulant.
pub fn naive_spectral(cube: &HyperCube, g: &[f64]) -> Vec<f64> {
    let (l, n) = (cube.bands(), cube.pixels());
    let mut out = vec![0.0; l * n];
    for band in 0..l {
        for (k, gk) in g.iter().enumerate() {
            let src = cube.band_data((band + k) % l);
            for i in 0..n {
                out[band * n + i] += gk * src[i];
            }
        }
    }
    out
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Derivative-free minimizer of a convex function of a 2-vector whose
/// non-smooth set is either the origin or the line `⟨y, normal⟩ = 0`.
///
/// Coarse grid around `start`, compass search from the best grid point, and
/// an exact search of the kink set (golden section along the line, or the
/// origin itself). Returns the best candidate.
pub fn brute_force_min2(
    f: &dyn Fn([f64; 2]) -> f64,
    start: [f64; 2],
    span: f64,
    kink_line_normal: Option<[f64; 2]>,
) -> [f64; 2] {
    let mut best = start;
    let mut best_val = f(start);
    let steps = 40;
    for i in 0..=steps {
        for j in 0..=steps {
            let y = [
                start[0] - span + 2.0 * span * i as f64 / steps as f64,
                start[1] - span + 2.0 * span * j as f64 / steps as f64,
            ];
            let v = f(y);
            if v < best_val {
                best = y;
                best_val = v;
            }
        }
    }
    let dirs: Vec<[f64; 2]> = (0..16)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / 16.0;
            [t.cos(), t.sin()]
        })
        .collect();
    let mut step = span / steps as f64;
    while step > 1e-13 {
        let mut moved = false;
        for d in &dirs {
            let y = [best[0] + step * d[0], best[1] + step * d[1]];
            let v = f(y);
            if v < best_val {
                best = y;
                best_val = v;
                moved = true;
                break;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    let kink = match kink_line_normal {
        None => [0.0, 0.0],
        Some(nrm) => {
            let dir = [-nrm[1], nrm[0]];
            let g = |t: f64| f([t * dir[0], t * dir[1]]);
            let t = golden_section(&g, -(span + 10.0), span + 10.0);
            [t * dir[0], t * dir[1]]
        }
    };
    if f(kink) <= best_val {
        kink
    } else {
        best
    }
}

fn golden_section(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    while (b - a).abs() > 1e-13 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - phi * (b - a);
        d = a + phi * (b - a);
    }
    0.5 * (a + b)
}

/// Random sensor model on a grid divisible by `q`.
pub fn random_model(rng: &mut impl Rng, q: usize, bands: usize) -> SensorModel {
    let g = random_weights(rng, bands);
    SensorModel::new(q, random_psf(rng), g, vec![0.0; bands], 0.0).unwrap()
}

/// Worst normalized gap `|⟨Au,v⟩ − ⟨u,Aᵀv⟩| / (‖Au‖‖v‖)` per operator pair
/// over `probes` random probes.
pub fn adjoint_gaps(probes: usize, seed: u64) -> Vec<(&'static str, f64)> {
    use panfuse::operators::*;
    let mut rng = rng(seed);
    let mut worst = vec![
        ("gradient", 0.0f64),
        ("decimation", 0.0),
        ("spatial blur", 0.0),
        ("pan mix", 0.0),
        ("spectral blur", 0.0),
        ("stacked M", 0.0),
    ];
    let mut record = |k: usize, lhs: f64, rhs: f64, scale: f64| {
        let gap = (lhs - rhs).abs() / scale.max(f64::MIN_POSITIVE);
        worst[k].1 = worst[k].1.max(gap);
    };
    for _ in 0..probes {
        let q = rng.random_range(1..4);
        let w = q * rng.random_range(1..5);
        let h = q * rng.random_range(1..5);
        let l = rng.random_range(1..5);
        let offset = (rng.random_range(0..q), rng.random_range(0..q));
        let model = random_model(&mut rng, q, l);

        let u = random_plane(&mut rng, w, h);
        let f = random_field(&mut rng, w, h);
        let gu = gradient(&u);
        record(0, gu.dot(&f).unwrap(), u.dot(&divergence(&f)).unwrap(), gu.norm() * f.norm());

        let low = random_plane(&mut rng, w / q, h / q);
        let du = spatial_downsample(&u, q, offset).unwrap();
        let dt = spatial_downsample_adjoint(&low, q, offset).unwrap();
        record(1, du.dot(&low).unwrap(), u.dot(&dt).unwrap(), du.norm() * low.norm());

        let v = random_plane(&mut rng, w, h);
        let hu = spatial_convolve(&u, &model.psf);
        let ht = spatial_convolve_adjoint(&v, &model.psf);
        record(2, hu.dot(&v).unwrap(), u.dot(&ht).unwrap(), hu.norm() * v.norm());

        let cube = random_cube(&mut rng, w, h, l);
        let gu = pan_mix(&cube, &model.g).unwrap();
        let gt = pan_mix_adjoint(&v, &model.g).unwrap();
        record(3, gu.dot(&v).unwrap(), cube.dot(&gt).unwrap(), gu.norm() * v.norm());

        let other = random_cube(&mut rng, w, h, l);
        let su = spectral_convolve(&cube, &model.g).unwrap();
        let st = spectral_convolve_adjoint(&other, &model.g).unwrap();
        record(4, su.dot(&other).unwrap(), cube.dot(&st).unwrap(), su.norm() * other.norm());

        let op = SplitOperator::new(&model, w, h).unwrap();
        let sv = random_split(&mut rng, w, h, l);
        let mu = op.apply(&cube).unwrap();
        let mt = op.adjoint(&sv).unwrap();
        record(5, mu.dot(&sv).unwrap(), cube.dot(&mt).unwrap(), mu.norm() * sv.norm());
    }
    worst
}

/// Relative gaps `‖u_fft − u_dense‖ / ‖u_dense‖` of the Fourier u-solve
/// against the dense normal equations, on `instances` random problems up to
/// 6×6×3.
pub fn fourier_solve_gaps(instances: usize, seed: u64) -> Vec<f64> {
    use panfuse::SplitOperator;
    let mut rng = rng(seed);
    (0..instances)
        .map(|_| {
            let w = rng.random_range(1..7);
            let h = rng.random_range(1..7);
            let l = rng.random_range(1..4);
            let model = random_model(&mut rng, 1, l);
            let op = SplitOperator::new(&model, w, h).unwrap();
            let rhs = random_split(&mut rng, w, h, l);
            let fast = op.solve_u_fourier(&rhs).unwrap();
            let dense = dense_least_squares(&dense_m(&model, w, h), &flatten(&rhs));
            let diff: Vec<f64> = fast.data().iter().zip(&dense).map(|(a, b)| a - b).collect();
            norm(&diff) / norm(&dense)
        })
        .collect()
}

/// Worst errors of the closed-form prox maps against brute-force
/// minimization of their objectives on `trials` random `(z, τ, η)` triples:
/// `(tv error, level-line error)`.
pub fn prox_oracle_errors(trials: usize, seed: u64) -> (f64, f64) {
    use panfuse::prox::{shrink, shrink_along};
    let mut rng = rng(seed);
    let (mut tv_err, mut ll_err) = (0.0f64, 0.0f64);
    for _ in 0..trials {
        let z = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let tau = rng.random_range(0.0..2.0);
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        let eta = [angle.cos(), angle.sin()];
        let dist2 = |y: [f64; 2]| 0.5 * ((y[0] - z[0]).powi(2) + (y[1] - z[1]).powi(2));

        let tv_obj = |y: [f64; 2]| tau * y[0].hypot(y[1]) + dist2(y);
        let brute = brute_force_min2(&tv_obj, z, 2.5, None);
        let exact = shrink(z, tau);
        tv_err = tv_err.max((brute[0] - exact[0]).hypot(brute[1] - exact[1]));

        let ll_obj = |y: [f64; 2]| tau * (y[0] * eta[0] + y[1] * eta[1]).abs() + dist2(y);
        let brute = brute_force_min2(&ll_obj, z, 2.5, Some(eta));
        let exact = shrink_along(z, eta, tau);
        ll_err = ll_err.max((brute[0] - exact[0]).hypot(brute[1] - exact[1]));
    }
    (tv_err, ll_err)
}

/// Worst `(idempotence, feasibility)` defects of `project_ball`, both
/// relative to the measurement scale, on `trials` random balls.
pub fn ball_defects(trials: usize, seed: u64) -> (f64, f64) {
    use panfuse::prox::{project_ball, BallSpec, Selector};
    let mut rng = rng(seed);
    let (mut idem, mut feas) = (0.0f64, 0.0f64);
    for k in 0..trials {
        let q = rng.random_range(1..4);
        let (w, h) = (q * rng.random_range(1..5), q * rng.random_range(1..5));
        let (selector, len, m) = match k % 3 {
            0 => (Selector::Identity, w * h, w * h),
            1 => (
                Selector::Spatial {
                    width: w,
                    height: h,
                    q,
                    offset: (rng.random_range(0..q), rng.random_range(0..q)),
                },
                w * h,
                (w / q) * (h / q),
            ),
            _ => {
                let l = rng.random_range(1..4);
                (Selector::Spectral { pixels: w * h }, w * h * l, w * h)
            }
        };
        let data = random_vec(&mut rng, m);
        let radius = rng.random_range(0.0..1.5);
        let spec = BallSpec::new(data.clone(), radius, selector).unwrap();
        let z: Vec<f64> = random_vec(&mut rng, len).iter().map(|v| 3.0 * v).collect();
        let once = project_ball(&z, &spec).unwrap();
        let twice = project_ball(&once, &spec).unwrap();
        let scale = norm(&data).max(radius).max(1.0);
        idem = idem.max(max_abs_diff(&once, &twice) / scale);
        feas = feas.max((spec.distance(&once) - radius).max(0.0) / scale);
    }
    (idem, feas)
}

/// Per-band fraction of seeds for which the simulated noise satisfies
/// `‖n_l‖² ≤ M σ_l²`, plus the same rate for the pan noise and `N σ_p²`.
pub fn noise_bound_rates(seeds: u64) -> (Vec<f64>, f64) {
    use panfuse::sim::*;
    let (w, h, l, q) = (16, 16, 4, 2);
    let reference = piecewise_constant_scene(&SceneSpec {
        width: w,
        height: h,
        bands: l,
        shapes: 4,
        seed: 0,
    })
    .unwrap();
    let sigma_x = vec![0.01, 0.02, 0.005, 0.03];
    let sigma_p = 0.01;
    let model = SensorModel::new(q, Psf::box_average(q), vec![0.25; l], sigma_x.clone(), sigma_p).unwrap();
    let clean = blur_and_decimate(&reference, &model).unwrap();
    let clean_pan = panfuse::operators::pan_mix(&reference, &model.g).unwrap();
    let m = clean.pixels() as f64;
    let n = clean_pan.len() as f64;
    let mut hits = vec![0usize; l];
    let mut pan_hits = 0;
    for seed in 0..seeds {
        let scenario = SimScenario::new(reference.clone(), model.clone(), seed).unwrap();
        let x = degrade_hx(&scenario).unwrap();
        for b in 0..l {
            let e2: f64 = x.band_data(b).iter().zip(clean.band_data(b)).map(|(a, c)| (a - c).powi(2)).sum();
            if e2 <= m * sigma_x[b] * sigma_x[b] {
                hits[b] += 1;
            }
        }
        let p = degrade_pan(&scenario).unwrap();
        let e2: f64 = p.data().iter().zip(clean_pan.data()).map(|(a, c)| (a - c).powi(2)).sum();
        if e2 <= n * sigma_p * sigma_p {
            pan_hits += 1;
        }
    }
    let rates = hits.iter().map(|&k| k as f64 / seeds as f64).collect();
    (rates, pan_hits as f64 / seeds as f64)
}

/// Noiseless piecewise-constant scene degraded with a `q × q` average and
/// uniform weights; the returned model carries noise level `sigma` for the radii.
/// Returns `(reference, x, p, model)`.
pub fn scene_problem(seed: u64, size: usize, bands: usize, q: usize, sigma: f64) -> (HyperCube, HyperCube, Plane, SensorModel) {
    let reference = piecewise_constant_scene(&SceneSpec {
        width: size,
        height: size,
        bands,
        shapes: 4,
        seed,
    })
    .unwrap();
    let clean = SensorModel::uniform(q, Psf::box_average(q), bands, 0.0, 0.0).unwrap();
    let scenario = SimScenario::new(reference.clone(), clean, seed).unwrap();
    let x = degrade_hx(&scenario).unwrap();
    let p = degrade_pan(&scenario).unwrap();
    let model = SensorModel::uniform(q, Psf::box_average(q), bands, sigma, sigma).unwrap();
    (reference, x, p, model)
}

/// Problem whose prox maps are all identities (`γ = 1`, flat pan image,
/// infinite radii), with a random `u` and `y = M u`, `λ = 0`.
pub fn identity_prox_problem(seed: u64) -> (PanSharpener, SplitState) {
    let mut rng = rng(seed);
    let (w, h, l, q) = (8, 6, 3, 2);
    let model = SensorModel::new(q, random_psf(&mut rng), random_weights(&mut rng, l), vec![0.1; l], 0.1).unwrap();
    let x = random_cube(&mut rng, w / q, h / q, l);
    let p = Plane::filled(w, h, 0.4);
    let config = SolverConfig {
        gamma: 1.0,
        radius_scale: f64::INFINITY,
        ..Default::default()
    };
    let solver = PanSharpener::new(&x, &p, &model, &config).unwrap();
    let u = random_cube(&mut rng, w, h, l);
    let mu = solver.operator().apply(&u).unwrap();
    let state = SplitState {
        u,
        y: mu.clone(),
        lambda: solver.operator().zeros(),
        mu,
        iteration: 0,
        history: Vec::new(),
    };
    (solver, state)
}

/// Cube whose bands are all `plane`, the pan image of which is `plane` again
/// for any unit-sum weights.
pub fn replicated(plane: &Plane, bands: usize) -> HyperCube {
    HyperCube::from_bands(&vec![plane.clone(); bands]).unwrap()
}

/// `(rmse, ergas, sam, fcc, d_s, d_lambda)` when estimate = reference and the
/// pan image is consistent with both; should be `(0, 0, 0, 1, 0, 0)`.
pub fn degenerate_values(seed: u64) -> [f64; 6] {
    let mut rng = rng(seed);
    let (w, h, l, q) = (8, 8, 3, 2);
    let p = Plane::new(w, h, (0..w * h).map(|_| rng.random_range(0.2..1.0)).collect()).unwrap();
    let reference = replicated(&p, l);
    let model = SensorModel::uniform(q, Psf::box_average(q), l, 0.0, 0.0).unwrap();
    let x = blur_and_decimate(&reference, &model).unwrap();
    let report = evaluate(EvaluationInputs {
        estimate: &reference,
        reference: Some(&reference),
        x: Some(&x),
        p: Some(&p),
        model: Some(&model),
        q,
    })
    .unwrap();
    [
        report.rmse.unwrap(),
        report.ergas.unwrap(),
        report.sam.unwrap(),
        report.fcc.unwrap(),
        report.d_s.unwrap(),
        report.d_lambda.unwrap(),
    ]
}
