use std::f64::consts::PI;

/// Envelope factor in one coordinate: `sin²(π x)` or the constant 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Envelope {
    One,
    SinSquared,
}

impl Envelope {
    /// `i`-th derivative at `x`.
    fn derivative(self, i: u32, x: f64) -> f64 {
        match (self, i) {
            (Envelope::One, 0) => 1.0,
            (Envelope::One, _) => 0.0,
            (Envelope::SinSquared, 0) => (PI * x).sin().powi(2),
            // sin²(πx) = (1 - cos 2πx) / 2
            (Envelope::SinSquared, _) => {
                -0.5 * (2.0 * PI).powi(i as i32) * (2.0 * PI * x + f64::from(i) * PI / 2.0).cos()
            }
        }
    }
}

/// `amp · A(x₁) B(x₂) sin(π(α x₁ + β x₂ + γ t))`, with closed-form derivatives
/// of any order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wave {
    pub amp: f64,
    pub env: [Envelope; 2],
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

impl Wave {
    pub fn jet(&self, x: [f64; 2], t: f64) -> WaveJet {
        let (s, c) = (PI * (self.alpha * x[0] + self.beta * x[1] + self.gamma * t)).sin_cos();
        // sin(θ + mπ/2) cycles through s, c, -s, -c
        let cyc = [s, c, -s, -c];
        let mut wave = [0.0; JET_ORDER + 1];
        let mut k = 1.0;
        for (m, w) in wave.iter_mut().enumerate() {
            *w = k * cyc[m % 4];
            k *= PI;
        }
        WaveJet {
            amp: self.amp,
            env: [envelope_jet(self.env[0], x[0]), envelope_jet(self.env[1], x[1])],
            wave,
            alpha: powers(self.alpha),
            beta: powers(self.beta),
            gamma: self.gamma,
        }
    }

    pub fn value(&self, x: [f64; 2], t: f64) -> f64 {
        self.derivative(x, t, 0, 0, 0)
    }

    /// `∂^a_{x₁} ∂^b_{x₂} ∂^c_t` by the Leibniz rule.
    pub fn derivative(&self, x: [f64; 2], t: f64, a: u32, b: u32, c: u32) -> f64 {
        let s = self.alpha * x[0] + self.beta * x[1] + self.gamma * t;
        // m-th derivative of sin(π s) with respect to s
        let wave = |m: u32| PI.powi(m as i32) * (PI * s + f64::from(m) * PI / 2.0).sin();
        let mut total = 0.0;
        for i in 0..=a {
            let ai = self.env[0].derivative(i, x[0]);
            if ai == 0.0 {
                continue;
            }
            for j in 0..=b {
                let bj = self.env[1].derivative(j, x[1]);
                if bj == 0.0 {
                    continue;
                }
                let (ra, rb) = (a - i, b - j);
                let chain = self.alpha.powi(ra as i32) * self.beta.powi(rb as i32) * self.gamma.powi(c as i32);
                total += binomial(a, i) * binomial(b, j) * ai * bj * chain * wave(ra + rb + c);
            }
        }
        self.amp * total
    }
}

/// Highest total derivative order a [`WaveJet`] holds.
pub const JET_ORDER: usize = 4;

/// Derivatives of one [`Wave`] at a fixed point, from two `sin`/`cos` pairs
/// per factor instead of one trig call per Leibniz term.
#[derive(Clone, Copy, Debug)]
pub struct WaveJet {
    amp: f64,
    env: [[f64; JET_ORDER + 1]; 2],
    wave: [f64; JET_ORDER + 1],
    alpha: [f64; JET_ORDER + 1],
    beta: [f64; JET_ORDER + 1],
    gamma: f64,
}

fn envelope_jet(env: Envelope, x: f64) -> [f64; JET_ORDER + 1] {
    match env {
        Envelope::One => {
            let mut d = [0.0; JET_ORDER + 1];
            d[0] = 1.0;
            d
        }
        Envelope::SinSquared => {
            let (s, c) = (2.0 * PI * x).sin_cos();
            // cos(θ + iπ/2) cycles through c, -s, -c, s
            let cyc = [c, -s, -c, s];
            let mut d = [0.0; JET_ORDER + 1];
            d[0] = (PI * x).sin().powi(2);
            let mut k = 2.0 * PI;
            for (i, di) in d.iter_mut().enumerate().skip(1) {
                *di = -0.5 * k * cyc[i % 4];
                k *= 2.0 * PI;
            }
            d
        }
    }
}

fn powers(a: f64) -> [f64; JET_ORDER + 1] {
    let mut p = [1.0; JET_ORDER + 1];
    for i in 1..=JET_ORDER {
        p[i] = p[i - 1] * a;
    }
    p
}

impl WaveJet {
    /// `∂^a_{x₁} ∂^b_{x₂} ∂^c_t` for `a + b + c <= JET_ORDER`, `c <= 1`.
    pub fn d(&self, a: usize, b: usize, c: usize) -> f64 {
        debug_assert!(a + b + c <= JET_ORDER && c <= 1);
        let chain_t = if c == 0 { 1.0 } else { self.gamma };
        let mut total = 0.0;
        for i in 0..=a {
            let ai = self.env[0][i];
            if ai == 0.0 {
                continue;
            }
            for j in 0..=b {
                let bj = self.env[1][j];
                if bj == 0.0 {
                    continue;
                }
                let (ra, rb) = (a - i, b - j);
                total += BINOM[a][i] * BINOM[b][j] * ai * bj * self.alpha[ra] * self.beta[rb] * chain_t
                    * self.wave[ra + rb + c];
            }
        }
        self.amp * total
    }
}

const BINOM: [[f64; JET_ORDER + 1]; JET_ORDER + 1] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0, 0.0],
    [1.0, 3.0, 3.0, 1.0, 0.0],
    [1.0, 4.0, 6.0, 4.0, 1.0],
];
