//! Nelder–Mead simplex maximization.

/// Maximizes `f` from `start` with an axis-aligned initial simplex of edge `step`.
///
/// Non-finite objective values are treated as the worst possible. Returns the
/// best point and its value after at most `iterations` iterations.
pub fn maximize<F: FnMut(&[f64]) -> f64>(mut f: F, start: &[f64], step: f64, iterations: usize) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            -v
        } else {
            f64::INFINITY
        }
    };
    let mut pts: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p)).collect();

    for _ in 0..iterations {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let spread = (vals[n] - vals[0]).abs();
        let size = pts.iter().skip(1).map(|p| dist(p, &pts[0])).fold(0.0, f64::max);
        if spread < 1e-12 && size < 1e-9 {
            break;
        }

        let centroid: Vec<f64> = (0..n).map(|k| pts[..n].iter().map(|p| p[k]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|k| centroid[k] + t * (pts[n][k] - centroid[k])).collect() };

        let xr = along(-1.0);
        let fr = eval(&xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = eval(&xe);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let x = along(-0.5);
            let v = eval(&x);
            (x, v)
        } else {
            let x = along(0.5);
            let v = eval(&x);
            (x, v)
        };
        if fc < vals[n].min(fr) {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        // shrink towards the best vertex
        for i in 1..=n {
            let p: Vec<f64> = (0..n).map(|k| pts[0][k] + 0.5 * (pts[i][k] - pts[0][k])).collect();
            vals[i] = eval(&p);
            pts[i] = p;
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).expect("non-empty simplex");
    (pts[best].clone(), -vals[best])
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
