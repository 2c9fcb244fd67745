//! CSV tables with a header row.

use std::io::Write;

use abcf::cf::CfExpansion;
use abcf::excursion::FrequencyProfile;

use crate::{domain, Failure};

pub fn quotients<W: Write>(w: W, e: &CfExpansion) -> Result<(), Failure> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["index", "quotient"]).map_err(domain)?;
    for (i, q) in e.quotients.iter().enumerate() {
        wr.write_record([i.to_string(), q.to_string()]).map_err(domain)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn cloud<W: Write>(w: W, points: &[(f64, f64)]) -> Result<(), Failure> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["x", "y"]).map_err(domain)?;
    for (x, y) in points {
        wr.write_record([x.to_string(), y.to_string()]).map_err(domain)?;
    }
    wr.flush()?;
    Ok(())
}

/// One row per checkpoint: `N`, `A_N`, `A_N^xi` per xi, `S_N`, then `I_N^d`,
/// `1 - I_N^d` and, when present, the oracle fraction per d.
pub fn checkpoints<W: Write>(w: W, p: &FrequencyProfile) -> Result<(), Failure> {
    let mut wr = csv::Writer::from_writer(w);
    let oracle = p.checkpoints.iter().any(|c| c.oracle.is_some());
    let mut head = vec!["N".to_string(), "A_N".to_string()];
    head.extend(p.xi_list.iter().map(|xi| format!("A_N^{xi}")));
    head.push("S_N".into());
    head.extend(p.d_list.iter().map(|d| format!("I_N^{d}")));
    head.extend(p.d_list.iter().map(|d| format!("1-I_N^{d}")));
    if oracle {
        head.extend(p.d_list.iter().map(|d| format!("oracle_{d}")));
        head.extend(p.d_list.iter().map(|d| format!("oracle_err_{d}")));
    }
    wr.write_record(&head).map_err(domain)?;
    for c in &p.checkpoints {
        let mut row = vec![c.n.to_string(), c.a_n.to_string()];
        row.extend(c.a_n_xi.iter().map(|v| v.to_string()));
        row.push(c.s_n.to_string());
        row.extend(c.i_n.iter().map(|v| v.to_string()));
        row.extend(c.i_n_complement.iter().map(|v| v.to_string()));
        if oracle {
            let est = c.oracle.as_deref().unwrap_or(&[]);
            row.extend((0..p.d_list.len()).map(|i| est.get(i).map(|e| e.fraction.to_string()).unwrap_or_default()));
            row.extend((0..p.d_list.len()).map(|i| est.get(i).map(|e| e.error_bound.to_string()).unwrap_or_default()));
        }
        wr.write_record(&row).map_err(domain)?;
    }
    wr.flush()?;
    Ok(())
}
