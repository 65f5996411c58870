use peridyn_core::spectrum::{spectrum_table, SpectrumRecord};
use peridyn_core::{Material, NonlocalParams, TorusSpec};

use crate::output::num;
use crate::CliError;

pub fn header(n: usize) -> String {
    let ks: Vec<String> = (1..=n).map(|i| format!("k{i}")).collect();
    format!("{},nu_norm,lambda1,lambda2,multiplicity2", ks.join(","))
}

pub fn to_csv(n: usize, records: &[SpectrumRecord]) -> String {
    let mut out = header(n);
    out.push('\n');
    for r in records {
        let ks: Vec<String> = r.k.iter().map(i64::to_string).collect();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            ks.join(","),
            num(r.nu_norm()),
            num(r.lambda1),
            num(r.lambda2),
            r.multiplicity2
        ));
    }
    out
}

pub fn run(
    params: &NonlocalParams,
    material: &Material,
    torus: &TorusSpec,
    k_max: i64,
) -> Result<String, CliError> {
    let records = spectrum_table(params, material, torus, k_max)?;
    Ok(to_csv(params.n(), &records))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_box() {
        let params = NonlocalParams::new(2, 1.0, 1.0).unwrap();
        let m = Material::new(1.0, 1.0).unwrap();
        let csv = run(&params, &m, &TorusSpec::standard(2), 0).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k1,k2,nu_norm,lambda1,lambda2,multiplicity2");
        assert_eq!(lines.len(), 2);
        let f: Vec<&str> = lines[1].split(',').collect();
        assert_eq!((f[0], f[1], f[5]), ("0", "0", "1"));
        assert!(f[2..5].iter().all(|x| x.parse::<f64>().unwrap() == 0.0));
    }
}
