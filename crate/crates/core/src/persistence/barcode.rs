use std::cmp::Ordering;

/// A persistence interval. `death` is `f64::INFINITY` for essential classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bar {
    pub birth: f64,
    pub death: f64,
}

impl Bar {
    pub fn new(birth: f64, death: f64) -> Self {
        Bar { birth, death }
    }

    pub fn essential(birth: f64) -> Self {
        Bar {
            birth,
            death: f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.death.is_finite()
    }

    pub fn lifespan(&self) -> f64 {
        self.death - self.birth
    }

    fn total_cmp(&self, other: &Bar) -> Ordering {
        self.birth
            .total_cmp(&other.birth)
            .then(self.death.total_cmp(&other.death))
    }
}

/// Multiset of bars in one homology dimension. Repeated bars carry
/// multiplicity.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Barcode {
    dim: usize,
    bars: Vec<Bar>,
}

impl Barcode {
    pub fn new(dim: usize) -> Self {
        Barcode {
            dim,
            bars: Vec::new(),
        }
    }

    pub fn from_bars(dim: usize, bars: impl IntoIterator<Item = Bar>) -> Self {
        Barcode {
            dim,
            bars: bars.into_iter().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bars(&self) -> &[Bar] {
        &self.bars
    }

    pub fn push(&mut self, bar: Bar) {
        self.bars.push(bar);
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn sort(&mut self) {
        self.bars.sort_by(Bar::total_cmp);
    }

    /// Bars in canonical order, for multiset comparison.
    pub fn sorted(&self) -> Vec<Bar> {
        let mut bars = self.bars.clone();
        bars.sort_by(Bar::total_cmp);
        bars
    }

    /// Distinct bars with their multiplicities, in canonical order.
    pub fn multiplicities(&self) -> Vec<(Bar, usize)> {
        let mut out: Vec<(Bar, usize)> = Vec::new();
        for bar in self.sorted() {
            match out.last_mut() {
                Some((last, count)) if *last == bar => *count += 1,
                _ => out.push((bar, 1)),
            }
        }
        out
    }

    pub fn essential_count(&self) -> usize {
        self.bars.iter().filter(|b| !b.is_finite()).count()
    }

    /// Scales every endpoint by `c`.
    pub fn scaled(&self, c: f64) -> Barcode {
        Barcode {
            dim: self.dim,
            bars: self
                .bars
                .iter()
                .map(|b| Bar::new(b.birth * c, b.death * c))
                .collect(),
        }
    }

    /// Bars alive at `t`, i.e. with `birth <= t < death`.
    pub fn alive_at(&self, t: f64) -> usize {
        self.bars
            .iter()
            .filter(|b| b.birth <= t && t < b.death)
            .count()
    }
}

/// Barcodes for homology dimensions `0..=max_dim`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Barcodes {
    by_dim: Vec<Barcode>,
}

impl Barcodes {
    pub fn new(max_dim: usize) -> Self {
        Barcodes {
            by_dim: (0..=max_dim).map(Barcode::new).collect(),
        }
    }

    pub fn from_vec(by_dim: Vec<Barcode>) -> Self {
        Barcodes { by_dim }
    }

    /// Barcode in dimension `dim`; empty if `dim` exceeds the computed range.
    pub fn dim(&self, dim: usize) -> Barcode {
        self.by_dim
            .get(dim)
            .cloned()
            .unwrap_or_else(|| Barcode::new(dim))
    }

    pub fn get(&self, dim: usize) -> Option<&Barcode> {
        self.by_dim.get(dim)
    }

    pub fn get_mut(&mut self, dim: usize) -> Option<&mut Barcode> {
        self.by_dim.get_mut(dim)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Barcode> {
        self.by_dim.iter()
    }

    pub fn max_dim(&self) -> usize {
        self.by_dim.len().saturating_sub(1)
    }

    pub fn total_bars(&self) -> usize {
        self.by_dim.iter().map(Barcode::len).sum()
    }

    pub fn sort(&mut self) {
        self.by_dim.iter_mut().for_each(Barcode::sort);
    }
}

/// Shannon entropy (nats) of the normalized lifespan distribution of the
/// finite bars. Essential bars are ignored; an empty or all-essential
/// barcode has entropy 0.
pub fn barcode_entropy(barcode: &Barcode) -> f64 {
    lifespan_entropy(
        barcode
            .bars()
            .iter()
            .filter(|b| b.is_finite())
            .map(Bar::lifespan),
    )
}

/// Entropy of a lifespan multiset; zero-length entries contribute nothing.
pub(crate) fn lifespan_entropy(lifespans: impl Iterator<Item = f64> + Clone) -> f64 {
    let total: f64 = lifespans.clone().sum();
    if !(total > 0.0) {
        return 0.0;
    }
    -lifespans
        .filter(|&l| l > 0.0)
        .map(|l| {
            let p = l / total;
            p * p.ln()
        })
        .sum::<f64>()
}
