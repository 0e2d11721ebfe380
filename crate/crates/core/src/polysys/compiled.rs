use super::poly::{monomial_value, rational_to_f64, Polynomial};
use super::PolySystem;

/// Floating-point snapshot of a [`Polynomial`] for hot evaluation loops.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    nvars: usize,
    coeffs: Vec<f64>,
    // row-major, one row of `nvars` exponents per term
    exps: Vec<u32>,
}

impl CompiledPoly {
    pub fn new(p: &Polynomial) -> Self {
        let nvars = p.nvars();
        let mut coeffs = Vec::with_capacity(p.num_terms());
        let mut exps = Vec::with_capacity(p.num_terms() * nvars);
        for (k, c) in p.terms() {
            coeffs.push(rational_to_f64(c));
            exps.extend_from_slice(k.entries());
        }
        Self { nvars, coeffs, exps }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Panics if `x.len() != nvars` in debug builds; callers validate dimensions up front.
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.nvars);
        if self.nvars == 0 {
            return self.coeffs.iter().sum();
        }
        self.coeffs
            .iter()
            .zip(self.exps.chunks_exact(self.nvars))
            .map(|(c, e)| c * monomial_value(e, x))
            .sum()
    }
}

/// Value plus gradient of one polynomial, compiled.
#[derive(Clone, Debug)]
pub struct CompiledDiff {
    value: CompiledPoly,
    partials: Vec<CompiledPoly>,
}

impl CompiledDiff {
    pub fn new(p: &Polynomial) -> Self {
        Self {
            value: CompiledPoly::new(p),
            partials: (0..p.nvars())
                .map(|j| CompiledPoly::new(&p.derivative(j)))
                .collect(),
        }
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.value.eval(x)
    }

    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, d) in out.iter_mut().zip(&self.partials) {
            *o = d.eval(x);
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.partials.iter().map(|d| d.eval(x)).collect()
    }
}

/// All components of a system, compiled with first derivatives.
#[derive(Clone, Debug)]
pub struct CompiledSystem {
    nvars: usize,
    components: Vec<CompiledDiff>,
}

impl CompiledSystem {
    pub fn new(sys: &PolySystem) -> Self {
        Self::from_polys(sys.nvars(), sys.polys())
    }

    pub fn from_polys(nvars: usize, polys: &[Polynomial]) -> Self {
        Self {
            nvars,
            components: polys.iter().map(CompiledDiff::new).collect(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component(&self, i: usize) -> &CompiledDiff {
        &self.components[i]
    }

    pub fn values(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.eval(x)).collect()
    }

    /// `f(x) = max_i f_i(x)`.
    pub fn max_value(&self, x: &[f64]) -> f64 {
        self.components
            .iter()
            .map(|c| c.eval(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `[f(x)]_+`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.max_value(x).max(0.0)
    }
}
