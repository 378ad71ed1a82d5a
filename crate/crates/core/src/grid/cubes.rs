use serde::Serialize;

use super::{GridSpec, MAX_DIM};
use crate::error::{Error, Result};

/// Axis-aligned cube made of whole grid cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Cube {
    lower: [usize; MAX_DIM],
    cells: usize,
}

impl Cube {
    pub fn new(lower: &[usize], cells: usize) -> Self {
        let mut l = [0; MAX_DIM];
        l[..lower.len()].copy_from_slice(lower);
        Self { lower: l, cells }
    }

    /// Lower-corner node index per axis.
    pub fn lower(&self) -> &[usize; MAX_DIM] {
        &self.lower
    }

    /// Side length in cells.
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn side(&self, grid: &GridSpec) -> f64 {
        self.cells as f64 * grid.spacing()
    }

    pub fn measure(&self, grid: &GridSpec) -> f64 {
        self.side(grid).powi(grid.dim() as i32)
    }

    pub fn node_count(&self, grid: &GridSpec) -> usize {
        self.cells.pow(grid.dim() as u32)
    }

    pub fn center(&self, grid: &GridSpec) -> Vec<f64> {
        (0..grid.dim())
            .map(|a| grid.coord(a, self.lower[a]) + 0.5 * self.side(grid))
            .collect()
    }

    pub fn fits(&self, grid: &GridSpec) -> bool {
        self.cells > 0
            && (0..grid.dim()).all(|a| self.lower[a] + self.cells <= grid.points_per_axis())
    }

    pub fn contains(&self, grid: &GridSpec, idx: &[usize]) -> bool {
        (0..grid.dim()).all(|a| idx[a] >= self.lower[a] && idx[a] < self.lower[a] + self.cells)
    }

    /// Calls `visit` with the flat index of every node in the cube.
    pub fn for_each_node(&self, grid: &GridSpec, mut visit: impl FnMut(usize)) {
        let m = grid.points_per_axis();
        let c = self.cells;
        let l = self.lower;
        match grid.dim() {
            1 => (l[0]..l[0] + c).for_each(visit),
            2 => {
                for i in l[0]..l[0] + c {
                    let row = i * m;
                    for j in l[1]..l[1] + c {
                        visit(row + j);
                    }
                }
            }
            _ => {
                for i in l[0]..l[0] + c {
                    for j in l[1]..l[1] + c {
                        let row = (i * m + j) * m;
                        for k in l[2]..l[2] + c {
                            visit(row + k);
                        }
                    }
                }
            }
        }
    }

    pub fn gather(&self, grid: &GridSpec, values: &[f64], out: &mut Vec<f64>) {
        out.clear();
        self.for_each_node(grid, |k| out.push(values[k]));
    }
}

/// Finite family of cubes inside a grid box, used to approximate suprema over all cubes.
#[derive(Clone, Debug)]
pub struct CubeFamily {
    grid: GridSpec,
    cubes: Vec<Cube>,
    scales: Vec<usize>,
}

/// Dyadic cubes of sides `2W/2^s` for the resolvable scales `s < max_scales`, placed on a
/// lattice of stride `side / translations_per_scale` (1 gives the dyadic tiling, 2 adds the
/// half-step shifted copies).
pub fn enumerate_cubes(
    grid: &GridSpec,
    max_scales: usize,
    translations_per_scale: usize,
) -> Result<CubeFamily> {
    if max_scales < 3 {
        return Err(Error::InvalidArgument(format!(
            "max_scales must be at least 3, got {max_scales}"
        )));
    }
    if translations_per_scale == 0 {
        return Err(Error::InvalidArgument(
            "translations_per_scale must be positive".into(),
        ));
    }
    let m = grid.points_per_axis();
    let scales: Vec<usize> = (0..max_scales)
        .take_while(|&s| s < usize::BITS as usize && m.is_multiple_of(1 << s))
        .collect();
    if scales.len() < 3 {
        return Err(Error::InvalidGrid(format!(
            "{m} points per axis resolve only {} dyadic scales",
            scales.len()
        )));
    }
    let mut cubes = Vec::new();
    for &s in &scales {
        let cells = m >> s;
        let stride = (cells / translations_per_scale).max(1);
        let positions: Vec<usize> = (0..=m - cells).step_by(stride).collect();
        push_lattice(grid.dim(), cells, &positions, &mut cubes);
    }
    Ok(CubeFamily {
        grid: grid.clone(),
        cubes,
        scales,
    })
}

fn push_lattice(dim: usize, cells: usize, positions: &[usize], out: &mut Vec<Cube>) {
    let mut idx = [0usize; MAX_DIM];
    loop {
        let lower: Vec<usize> = idx[..dim].iter().map(|&i| positions[i]).collect();
        out.push(Cube::new(&lower, cells));
        let mut a = dim;
        loop {
            if a == 0 {
                return;
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < positions.len() {
                break;
            }
            idx[a] = 0;
        }
    }
}

impl CubeFamily {
    /// Every resolvable dyadic scale down to single cells when the point count allows.
    pub fn point_scale(grid: &GridSpec, translations_per_scale: usize) -> Result<Self> {
        enumerate_cubes(grid, usize::BITS as usize - 1, translations_per_scale)
    }

    /// Family made of explicit cubes; each must fit in the grid.
    pub fn from_cubes(grid: &GridSpec, cubes: Vec<Cube>) -> Result<Self> {
        if cubes.is_empty() {
            return Err(Error::EmptyFamily);
        }
        if let Some(c) = cubes.iter().find(|c| !c.fits(grid)) {
            return Err(Error::InvalidArgument(format!(
                "cube {c:?} leaves the grid box"
            )));
        }
        let mut scales: Vec<usize> = cubes.iter().map(|c| c.cells).collect();
        scales.sort_unstable();
        scales.dedup();
        Ok(Self {
            grid: grid.clone(),
            cubes,
            scales,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    /// Scale indices (dyadic families) or side lengths in cells (explicit families).
    pub fn scales(&self) -> &[usize] {
        &self.scales
    }

    pub fn has_point_scale(&self) -> bool {
        self.cubes.iter().any(|c| c.cells == 1)
    }

    /// Appends cubes from another family on the same grid.
    pub fn extend(&mut self, other: &CubeFamily) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        self.cubes.extend_from_slice(&other.cubes);
        self.scales.extend_from_slice(&other.scales);
        self.scales.sort_unstable();
        self.scales.dedup();
        Ok(())
    }

    /// The same family transported to a grid with identical point layout.
    pub fn on_grid(&self, grid: &GridSpec) -> Result<Self> {
        if grid.dim() != self.grid.dim() || grid.points_per_axis() != self.grid.points_per_axis() {
            return Err(Error::GridMismatch(
                "cube family transported to a different layout".into(),
            ));
        }
        Ok(Self {
            grid: grid.clone(),
            cubes: self.cubes.clone(),
            scales: self.scales.clone(),
        })
    }

    pub(crate) fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        if self.cubes.is_empty() {
            return Err(Error::EmptyFamily);
        }
        self.grid.check_same(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn one_dimensional_tiling() {
        let g = make_grid(1, 1.0, 8, false).unwrap();
        let fam = enumerate_cubes(&g, 3, 1).unwrap();
        let sides: Vec<f64> = fam.cubes().iter().map(|c| c.side(&g)).collect();
        assert_eq!(sides, vec![2.0, 1.0, 1.0, 0.5, 0.5, 0.5, 0.5]);
    }

    #[test]
    fn half_step_count() {
        let g = make_grid(2, 1.0, 16, false).unwrap();
        let fam = enumerate_cubes(&g, 3, 2).unwrap();
        let tiles: usize = (0..3).map(|s| 1usize << (2 * s)).sum();
        let with_shifts: usize = (0..3).map(|s| ((2usize << s) - 1).pow(2)).sum();
        assert_eq!(tiles, 21);
        assert_eq!(fam.len(), with_shifts);
    }

    #[test]
    fn contains_full_box() {
        for dim in 1..=3 {
            let g = make_grid(dim, 2.0, 8, false).unwrap();
            let fam = enumerate_cubes(&g, 3, 2).unwrap();
            assert!(fam.cubes().iter().any(|c| c.cells() == 8));
            assert!(fam.cubes().iter().all(|c| c.fits(&g)));
        }
    }

    #[test]
    fn point_scale_reaches_single_cells() {
        let g = make_grid(2, 1.0, 16, false).unwrap();
        let fam = CubeFamily::point_scale(&g, 2).unwrap();
        assert!(fam.has_point_scale());
        assert_eq!(fam.scales().len(), 5);
    }

    #[test]
    fn too_few_scales() {
        let g = make_grid(1, 1.0, 6, false).unwrap();
        assert!(enumerate_cubes(&g, 3, 1).is_err());
        let g = make_grid(1, 1.0, 8, false).unwrap();
        assert!(enumerate_cubes(&g, 2, 1).is_err());
    }

    #[test]
    fn node_visits_match_count() {
        let g = make_grid(3, 1.0, 8, false).unwrap();
        let c = Cube::new(&[2, 4, 0], 4);
        let mut n = 0;
        c.for_each_node(&g, |k| {
            assert!(c.contains(&g, &g.unflatten(k)));
            n += 1;
        });
        assert_eq!(n, c.node_count(&g));
    }
}
