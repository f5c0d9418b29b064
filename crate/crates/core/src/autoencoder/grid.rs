use rayon::prelude::*;

use super::{train, AutoencoderError, Hyperparams, Objective};
use crate::dataset::kfold_split;

/// Candidate values per hyperparameter. The search covers their Cartesian
/// product, `alpha` outermost and `rho` innermost.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub rho: Vec<f64>,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            alpha: vec![0.0, 1e-4, 1e-3, 1e-2],
            beta: vec![0.0, 0.1, 1.0],
            rho: vec![0.05, 0.1],
        }
    }
}

impl Grid {
    pub fn len(&self) -> usize {
        self.alpha.len() * self.beta.len() * self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Product configurations in declaration order.
    pub fn configurations(&self, base: &Hyperparams) -> Vec<Hyperparams> {
        let mut out = Vec::with_capacity(self.len());
        for &alpha in &self.alpha {
            for &beta in &self.beta {
                for &rho in &self.rho {
                    out.push(Hyperparams {
                        alpha,
                        beta,
                        rho,
                        ..*base
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub hp: Hyperparams,
    /// Mean validation RMSE across folds.
    pub cv_rmse: f64,
    pub fold_rmse: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    pub best: Hyperparams,
    /// Every evaluated configuration in declaration order; empty when the
    /// grid has a single point.
    pub evaluated: Vec<GridPoint>,
}

/// Picks the configuration with the lowest mean k-fold validation RMSE.
/// Ties go to smaller `alpha`, then smaller `beta`, then declaration order.
pub fn grid_search<V: AsRef<[f64]> + Sync>(
    training: &[V],
    base: &Hyperparams,
    grid: &Grid,
    folds: usize,
    seed: u64,
) -> Result<GridSearchResult, AutoencoderError> {
    for (name, axis) in [("alpha", &grid.alpha), ("beta", &grid.beta), ("rho", &grid.rho)] {
        if axis.is_empty() {
            return Err(AutoencoderError::EmptyGrid(name));
        }
    }
    let configs = grid.configurations(base);
    if configs.len() == 1 {
        return Ok(GridSearchResult {
            best: configs[0],
            evaluated: Vec::new(),
        });
    }
    let split = kfold_split(training.len(), folds, seed)?;

    let evaluated = configs
        .par_iter()
        .map(|hp| {
            let fold_rmse = split
                .iter()
                .map(|fold| {
                    let tr: Vec<&[f64]> = fold.train.iter().map(|&i| training[i].as_ref()).collect();
                    let va: Vec<&[f64]> = fold.test.iter().map(|&i| training[i].as_ref()).collect();
                    let (net, _) = train(&tr, &[], hp)?;
                    Objective::new(&va, hp)?.rmse(&net)
                })
                .collect::<Result<Vec<f64>, AutoencoderError>>()?;
            let cv_rmse = fold_rmse.iter().sum::<f64>() / fold_rmse.len() as f64;
            Ok(GridPoint {
                hp: *hp,
                cv_rmse,
                fold_rmse,
            })
        })
        .collect::<Result<Vec<_>, AutoencoderError>>()?;

    let best = evaluated
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| {
            a.cv_rmse
                .total_cmp(&b.cv_rmse)
                .then(a.hp.alpha.total_cmp(&b.hp.alpha))
                .then(a.hp.beta.total_cmp(&b.hp.beta))
                .then(ia.cmp(ib))
        })
        .map(|(_, p)| p.hp)
        .expect("grid is non-empty");
    Ok(GridSearchResult { best, evaluated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::Variant;

    fn data() -> Vec<Vec<f64>> {
        (0..30)
            .map(|i| (0..5).map(|j| 0.5 + 0.3 * ((i * 7 + j * 3) as f64 * 0.4).sin()).collect())
            .collect()
    }

    fn base() -> Hyperparams {
        Hyperparams {
            variant: Variant::Wae,
            hidden: 2,
            max_iters: 30,
            ..Default::default()
        }
    }

    #[test]
    fn product_size_and_order() {
        let g = Grid::default();
        assert_eq!(g.len(), 4 * 3 * 2);
        let c = g.configurations(&base());
        assert_eq!(c.len(), 24);
        assert_eq!((c[0].alpha, c[0].beta, c[0].rho), (0.0, 0.0, 0.05));
        assert_eq!((c[1].alpha, c[1].beta, c[1].rho), (0.0, 0.0, 0.1));
        assert_eq!(c[6].alpha, 1e-4);
    }

    #[test]
    fn two_point_grid_returns_argmin() {
        let g = Grid {
            alpha: vec![0.0, 0.1],
            beta: vec![0.0],
            rho: vec![0.05],
        };
        let r = grid_search(&data(), &base(), &g, 3, 1).unwrap();
        assert_eq!(r.evaluated.len(), 2);
        let argmin = r
            .evaluated
            .iter()
            .min_by(|a, b| a.cv_rmse.total_cmp(&b.cv_rmse))
            .unwrap();
        assert_eq!(r.best, argmin.hp);
        assert!(r.evaluated.iter().all(|p| p.fold_rmse.len() == 3));
    }

    #[test]
    fn singleton_grid_skips_search() {
        let g = Grid {
            alpha: vec![0.01],
            beta: vec![0.0],
            rho: vec![0.1],
        };
        let r = grid_search(&data(), &base(), &g, 3, 1).unwrap();
        assert!(r.evaluated.is_empty());
        assert_eq!(r.best.alpha, 0.01);
    }

    #[test]
    fn ties_prefer_smaller_alpha() {
        // AE ignores alpha, so both configurations score identically.
        let g = Grid {
            alpha: vec![0.5, 0.0],
            beta: vec![0.0],
            rho: vec![0.05],
        };
        let hp = Hyperparams {
            variant: Variant::Ae,
            ..base()
        };
        let r = grid_search(&data(), &hp, &g, 3, 1).unwrap();
        assert_eq!(r.evaluated[0].cv_rmse, r.evaluated[1].cv_rmse);
        assert_eq!(r.best.alpha, 0.0);
    }

    #[test]
    fn empty_axis_rejected() {
        let g = Grid {
            alpha: vec![],
            beta: vec![0.0],
            rho: vec![0.05],
        };
        assert!(matches!(
            grid_search(&data(), &base(), &g, 3, 1),
            Err(AutoencoderError::EmptyGrid("alpha"))
        ));
    }
}
