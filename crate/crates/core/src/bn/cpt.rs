use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Conditional probability table. Rows are laid out row-major over the
/// parent state indices, first parent most significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cpt {
    pub child_card: usize,
    pub parent_cards: Vec<usize>,
    pub table: Vec<f64>,
}

impl Cpt {
    pub fn new(child_card: usize, parent_cards: Vec<usize>, table: Vec<f64>) -> Result<Self> {
        let cpt = Cpt {
            child_card,
            parent_cards,
            table,
        };
        cpt.validate()?;
        Ok(cpt)
    }

    pub fn uniform(child_card: usize, parent_cards: Vec<usize>) -> Self {
        let rows: usize = parent_cards.iter().product();
        Cpt {
            child_card,
            parent_cards,
            table: vec![1.0 / child_card as f64; rows * child_card],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.parent_cards.iter().product()
    }

    pub fn validate(&self) -> Result<()> {
        if self.table.len() != self.n_rows() * self.child_card {
            return Err(Error::Contract(format!(
                "table has {} entries, expected {} rows x {}",
                self.table.len(),
                self.n_rows(),
                self.child_card
            )));
        }
        for (r, row) in self.table.chunks(self.child_card).enumerate() {
            if row.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                return Err(Error::Contract(format!("row {r} has a negative or non-finite entry")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::Contract(format!("row {r} sums to {sum}")));
            }
        }
        Ok(())
    }

    /// Row index of a parent configuration.
    pub fn row_index(&self, parent_values: impl IntoIterator<Item = usize>) -> Result<usize> {
        let mut idx = 0;
        let mut n = 0;
        for (v, &card) in parent_values.into_iter().zip(&self.parent_cards) {
            if v >= card {
                return Err(Error::Contract(format!("parent level {v} out of range 0..{card}")));
            }
            idx = idx * card + v;
            n += 1;
        }
        if n != self.parent_cards.len() {
            return Err(Error::Contract("wrong number of parent values".into()));
        }
        Ok(idx)
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.table[row * self.child_card..(row + 1) * self.child_card]
    }

    pub fn row_mut(&mut self, row: usize) -> &mut [f64] {
        let c = self.child_card;
        &mut self.table[row * c..(row + 1) * c]
    }

    /// Builds a table from counts: `(count + alpha) / (total + alpha * card)`.
    /// A row with no mass at all (no data and `alpha = 0`) falls back to uniform.
    pub fn from_counts(child_card: usize, parent_cards: Vec<usize>, counts: &[f64], alpha: f64) -> Self {
        let mut table = Vec::with_capacity(counts.len());
        for row in counts.chunks(child_card) {
            let denom = row.iter().sum::<f64>() + alpha * child_card as f64;
            if denom > 0.0 {
                table.extend(row.iter().map(|&c| (c + alpha) / denom));
            } else {
                table.extend(std::iter::repeat_n(1.0 / child_card as f64, child_card));
            }
        }
        Cpt {
            child_card,
            parent_cards,
            table,
        }
    }
}
