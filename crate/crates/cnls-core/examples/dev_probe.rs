use cnls_core::linalg::DenseMatrix;

fn main() {
    for trial in 0..3 {
        let n = 300usize;
        let mut seed = 99u64 + trial;
        let mut rnd = move || {
            seed ^= seed << 13; seed ^= seed >> 7; seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut a = DenseMatrix::zeros(n);
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let v = rnd() / (n as f64) + if i == j { 3.0 } else { 0.0 };
                a.set(i, j, v);
                rows[i][j] = v;
            }
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let x = a.factor().unwrap().solve(&b);
        let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut worst = 0.0f64;
        for i in 0..n {
            let ax: f64 = rows[i].iter().zip(&x).map(|(r, xx)| r * xx).sum();
            worst = worst.max((ax - b[i]).abs());
        }
        println!("scaled random: |x| = {xn:.3e}, residual = {worst:.3e}");
    }
}
