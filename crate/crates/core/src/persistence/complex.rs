use crate::error::{Error, Result};

/// Accumulates cells in any order before sorting them into a
/// [`FilteredComplex`]. Cell ids are insertion indices.
#[derive(Debug, Clone, Default)]
pub struct FilteredComplexBuilder {
    dims: Vec<u8>,
    values: Vec<f64>,
    offsets: Vec<usize>,
    faces: Vec<u32>,
}

impl FilteredComplexBuilder {
    pub fn new() -> Self {
        FilteredComplexBuilder {
            offsets: vec![0],
            ..Default::default()
        }
    }

    pub fn with_capacity(cells: usize, faces: usize) -> Self {
        let mut offsets = Vec::with_capacity(cells + 1);
        offsets.push(0);
        FilteredComplexBuilder {
            dims: Vec::with_capacity(cells),
            values: Vec::with_capacity(cells),
            offsets,
            faces: Vec::with_capacity(faces),
        }
    }

    /// Adds a cell whose boundary lists the ids of its codimension-1 faces.
    pub fn add_cell(&mut self, dim: usize, value: f64, boundary: &[usize]) -> usize {
        let id = self.dims.len();
        self.dims.push(dim as u8);
        self.values.push(value);
        self.faces.extend(boundary.iter().map(|&f| f as u32));
        self.offsets.push(self.faces.len());
        id
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Sorts cells by (value, dimension, id) and validates the complex.
    pub fn build(self) -> Result<FilteredComplex> {
        let n = self.dims.len();
        if n > u32::MAX as usize {
            return Err(Error::InvalidComplex("too many cells".into()));
        }
        if let Some(i) = self.values.iter().position(|v| v.is_nan()) {
            return Err(Error::InvalidComplex(format!("cell {i} has NaN value")));
        }
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_unstable_by(|&a, &b| {
            let (a, b) = (a as usize, b as usize);
            self.values[a]
                .total_cmp(&self.values[b])
                .then(self.dims[a].cmp(&self.dims[b]))
                .then(a.cmp(&b))
        });
        let mut position = vec![0u32; n];
        for (pos, &id) in order.iter().enumerate() {
            position[id as usize] = pos as u32;
        }

        let mut dims = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        let mut offsets = Vec::with_capacity(n + 1);
        let mut faces = Vec::with_capacity(self.faces.len());
        offsets.push(0);
        for (pos, &id) in order.iter().enumerate() {
            let id = id as usize;
            let dim = self.dims[id];
            let value = self.values[id];
            let start = faces.len();
            for &face in &self.faces[self.offsets[id]..self.offsets[id + 1]] {
                let face = face as usize;
                if face >= n {
                    return Err(Error::InvalidComplex(format!(
                        "cell {id} references missing face {face}"
                    )));
                }
                if self.dims[face] + 1 != dim {
                    return Err(Error::InvalidComplex(format!(
                        "cell {id} of dim {dim} lists face {face} of dim {}",
                        self.dims[face]
                    )));
                }
                if self.values[face] > value {
                    return Err(Error::InvalidComplex(format!(
                        "face {face} enters after its coface {id}"
                    )));
                }
                let fpos = position[face];
                debug_assert!((fpos as usize) < pos);
                faces.push(fpos);
            }
            faces[start..].sort_unstable();
            if faces[start..].windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidComplex(format!(
                    "cell {id} lists a face twice"
                )));
            }
            if dim == 0 && faces.len() != start {
                return Err(Error::InvalidComplex(format!(
                    "vertex {id} has a non-empty boundary"
                )));
            }
            if dim > 0 && faces.len() == start {
                return Err(Error::InvalidComplex(format!(
                    "cell {id} of dim {dim} has an empty boundary"
                )));
            }
            dims.push(dim);
            values.push(value);
            offsets.push(faces.len());
        }
        let complex = FilteredComplex {
            ids: order,
            dims,
            values,
            offsets,
            faces,
        };
        complex.check_boundary_of_boundary()?;
        Ok(complex)
    }
}

/// Cells in filtration order with boundaries stored as positions in that
/// order. Construct through [`FilteredComplexBuilder`].
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredComplex {
    ids: Vec<u32>,
    dims: Vec<u8>,
    values: Vec<f64>,
    offsets: Vec<usize>,
    faces: Vec<u32>,
}

impl FilteredComplex {
    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Builder id of the cell at filtration position `pos`.
    pub fn id(&self, pos: usize) -> usize {
        self.ids[pos] as usize
    }

    pub fn dim(&self, pos: usize) -> usize {
        self.dims[pos] as usize
    }

    pub fn value(&self, pos: usize) -> f64 {
        self.values[pos]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Boundary of the cell at `pos`, as ascending filtration positions.
    pub fn boundary(&self, pos: usize) -> &[u32] {
        &self.faces[self.offsets[pos]..self.offsets[pos + 1]]
    }

    pub fn max_cell_dim(&self) -> Option<usize> {
        self.dims.iter().max().map(|&d| d as usize)
    }

    /// Number of cells per dimension.
    pub fn cell_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.max_cell_dim().map_or(0, |d| d + 1)];
        for &d in &self.dims {
            counts[d as usize] += 1;
        }
        counts
    }

    /// Over Z/2 the boundary of a boundary vanishes: every face of a face
    /// must appear an even number of times.
    fn check_boundary_of_boundary(&self) -> Result<()> {
        let mut scratch: Vec<u32> = Vec::new();
        for pos in 0..self.len() {
            if self.dims[pos] < 2 {
                continue;
            }
            scratch.clear();
            for &f in self.boundary(pos) {
                scratch.extend_from_slice(self.boundary(f as usize));
            }
            scratch.sort_unstable();
            let mut i = 0;
            while i < scratch.len() {
                let mut j = i;
                while j < scratch.len() && scratch[j] == scratch[i] {
                    j += 1;
                }
                if (j - i) % 2 == 1 {
                    return Err(Error::InvalidComplex(format!(
                        "boundary of boundary of cell {} is non-zero",
                        self.id(pos)
                    )));
                }
                i = j;
            }
        }
        Ok(())
    }
}
