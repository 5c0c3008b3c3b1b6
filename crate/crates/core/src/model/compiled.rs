use super::Qubo;

/// Dense adjacency form of a [`Qubo`] for inner loops: linear biases in a
/// vector and couplers in CSR layout, each pair stored from both ends.
#[derive(Debug, Clone)]
pub struct CompiledQubo {
    linear: Vec<f64>,
    row_start: Vec<usize>,
    neighbors: Vec<(usize, f64)>,
    offset: f64,
}

impl CompiledQubo {
    pub fn new(q: &Qubo) -> Self {
        let n = q.num_vars();
        let mut linear = vec![0.0; n];
        for (&i, &a) in q.linear() {
            linear[i] = a;
        }
        let mut degree = vec![0usize; n];
        for &(i, j) in q.quadratic().keys() {
            degree[i] += 1;
            degree[j] += 1;
        }
        let mut row_start = Vec::with_capacity(n + 1);
        row_start.push(0);
        for d in &degree {
            row_start.push(row_start.last().unwrap() + d);
        }
        let mut fill = row_start[..n].to_vec();
        let mut neighbors = vec![(0, 0.0); row_start[n]];
        for (&(i, j), &a) in q.quadratic() {
            neighbors[fill[i]] = (j, a);
            fill[i] += 1;
            neighbors[fill[j]] = (i, a);
            fill[j] += 1;
        }
        CompiledQubo {
            linear,
            row_start,
            neighbors,
            offset: q.offset(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.linear.len()
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn linear(&self, i: usize) -> f64 {
        self.linear[i]
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.neighbors[self.row_start[i]..self.row_start[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row_start[i + 1] - self.row_start[i]
    }

    pub fn energy(&self, x: &[bool]) -> f64 {
        let mut e = self.offset;
        for i in 0..self.num_vars() {
            if !x[i] {
                continue;
            }
            e += self.linear[i];
            // count each coupler once, from its lower end
            e += self
                .neighbors(i)
                .iter()
                .filter(|&&(j, _)| j > i && x[j])
                .map(|&(_, a)| a)
                .sum::<f64>();
        }
        e
    }

    /// `a_i + sum_j a_ij x_j`: the energy change of raising `x_i` from 0 to 1.
    pub fn local_field(&self, i: usize, x: &[bool]) -> f64 {
        self.linear[i]
            + self
                .neighbors(i)
                .iter()
                .filter(|&&(j, _)| x[j])
                .map(|&(_, a)| a)
                .sum::<f64>()
    }

    /// Energy change from flipping bit `i` of `x`.
    pub fn flip_delta(&self, i: usize, x: &[bool]) -> f64 {
        let h = self.local_field(i, x);
        if x[i] {
            -h
        } else {
            h
        }
    }

    /// Largest possible `|delta E|` of any single flip.
    pub fn max_flip_magnitude(&self) -> f64 {
        (0..self.num_vars())
            .map(|i| {
                self.linear[i].abs()
                    + self.neighbors(i).iter().map(|(_, a)| a.abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Smallest nonzero coefficient magnitude, if any.
    pub fn min_nonzero_coef(&self) -> Option<f64> {
        self.linear
            .iter()
            .chain(self.neighbors.iter().map(|(_, a)| a))
            .map(|a| a.abs())
            .filter(|&a| a > 0.0)
            .min_by(f64::total_cmp)
    }
}
