use alloc::collections::BinaryHeap;
use core::cmp::Ordering;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub(crate) struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Piece {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let s = f(c - r * XGK[j]) + f(c + r * XGK[j]);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    Piece {
        a,
        b,
        value: k * r,
        error: ((k - g) * r).abs(),
    }
}

/// Globally adaptive G7–K15 over the intervals between consecutive
/// `breaks`, bisecting the worst piece until the summed error estimate is
/// below `abs_tol` or `max_pieces` is reached.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: F, breaks: &[f64], abs_tol: f64, max_pieces: usize) -> QuadResult {
    let mut heap: BinaryHeap<Piece> = breaks.windows(2).map(|w| kronrod(&f, w[0], w[1])).collect();
    let mut evaluations = 15 * heap.len();
    let total_err = |h: &BinaryHeap<Piece>| h.iter().map(|p| p.error).sum::<f64>();
    while heap.len() < max_pieces && total_err(&heap) > abs_tol {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            heap.push(worst);
            break;
        }
        heap.push(kronrod(&f, worst.a, mid));
        heap.push(kronrod(&f, mid, worst.b));
        evaluations += 30;
    }
    let mut pieces = heap.into_vec();
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
    QuadResult {
        value: pieces.iter().map(|p| p.value).sum(),
        error: pieces.iter().map(|p| p.error).sum(),
        evaluations,
    }
}
