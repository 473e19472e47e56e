//! Gauss–Legendre rules on the reference interval `[-1, 1]`.

/// A 1D quadrature rule.
#[derive(Debug, Clone, Copy)]
pub struct GaussRule {
    pub points: &'static [f64],
    pub weights: &'static [f64],
}

const GAUSS2_POINTS: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];
const GAUSS2_WEIGHTS: [f64; 2] = [1.0, 1.0];

const GAUSS6_POINTS: [f64; 6] = [
    -0.932_469_514_203_152_1,
    -0.661_209_386_466_264_5,
    -0.238_619_186_083_196_9,
    0.238_619_186_083_196_9,
    0.661_209_386_466_264_5,
    0.932_469_514_203_152_1,
];
const GAUSS6_WEIGHTS: [f64; 6] = [
    0.171_324_492_379_170_3,
    0.360_761_573_048_138_6,
    0.467_913_934_572_691_0,
    0.467_913_934_572_691_0,
    0.360_761_573_048_138_6,
    0.171_324_492_379_170_3,
];

const GAUSS10_POINTS: [f64; 10] = [
    -0.973_906_528_517_171_7,
    -0.865_063_366_688_984_5,
    -0.679_409_568_299_024_4,
    -0.433_395_394_129_247_2,
    -0.148_874_338_981_631_22,
    0.148_874_338_981_631_22,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GAUSS10_WEIGHTS: [f64; 10] = [
    0.066_671_344_308_688_07,
    0.149_451_349_150_580_36,
    0.219_086_362_515_982,
    0.269_266_719_309_996_5,
    0.295_524_224_714_753,
    0.295_524_224_714_753,
    0.269_266_719_309_996_5,
    0.219_086_362_515_982,
    0.149_451_349_150_580_36,
    0.066_671_344_308_688_07,
];

/// Two-point rule, exact for cubics.
pub const GAUSS2: GaussRule = GaussRule {
    points: &GAUSS2_POINTS,
    weights: &GAUSS2_WEIGHTS,
};

/// Six-point rule, exact for polynomials of degree 11.
pub const GAUSS6: GaussRule = GaussRule {
    points: &GAUSS6_POINTS,
    weights: &GAUSS6_WEIGHTS,
};

/// Ten-point rule, exact for polynomials of degree 19.
pub const GAUSS10: GaussRule = GaussRule {
    points: &GAUSS10_POINTS,
    weights: &GAUSS10_WEIGHTS,
};

impl GaussRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points and weights mapped to `[lo, hi]`.
    pub fn mapped(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        self.points
            .iter()
            .zip(self.weights)
            .map(move |(&p, &w)| (mid + half * p, half * w))
    }
}
