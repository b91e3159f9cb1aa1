//! Standard normal and χ²(1) quantiles.

use crate::error::{Error, Result};

/// Standard normal quantile (Wichura's AS241 `PPND16`, ~1e-16 relative accuracy).
#[allow(clippy::inconsistent_digit_grouping, clippy::excessive_precision)]
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((r * 2509.080_928_730_122_7 + 33430.575_583_588_128) * r + 67265.770_927_008_7) * r
                + 45921.953_931_549_87)
                * r
                + 13731.693_765_509_461)
                * r
                + 1971.590_950_306_551_3)
                * r
                + 133.141_667_891_784_38)
                * r
                + 3.387_132_872_796_366_5)
            / (((((((r * 5226.495_278_852_545 + 28729.085_735_721_943) * r + 39307.895_800_092_71) * r
                + 21213.794_301_586_597)
                * r
                + 5394.196_021_424_751)
                * r
                + 687.187_007_492_057_9)
                * r
                + 42.313_330_701_600_91)
                * r
                + 1.0);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        (((((((r * 7.745_450_142_783_414e-4 + 0.022_723_844_989_269_184) * r + 0.241_780_725_177_450_6) * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5)
            / (((((((r * 1.050_750_071_644_416_9e-9 + 5.475_938_084_995_345e-4) * r + 0.015_198_666_563_616_457)
                * r
                + 0.148_103_976_427_480_08)
                * r
                + 0.689_767_334_985_1)
                * r
                + 1.676_384_830_183_803_8)
                * r
                + 2.053_191_626_637_759)
                * r
                + 1.0)
    } else {
        r -= 5.0;
        (((((((r * 2.010_334_399_292_288_1e-7 + 2.711_555_568_743_487_6e-5) * r + 0.001_242_660_947_388_078_4) * r
            + 0.026_532_189_526_576_124)
            * r
            + 0.296_560_571_828_504_9)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103)
            / (((((((r * 2.044_263_103_389_939_7e-15 + 1.421_511_758_316_446e-7) * r + 1.846_318_317_510_054_8e-5)
                * r
                + 7.868_691_311_456_133e-4)
                * r
                + 0.014_875_361_290_850_615)
                * r
                + 0.136_929_880_922_735_8)
                * r
                + 0.599_832_206_555_888)
                * r
                + 1.0)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Quantile of χ²(1) at probability `p`, via `z_{(1+p)/2}²`.
pub fn chi2_quantile_df1(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Usage(format!("probability must lie in (0, 1), got {p}")));
    }
    let z = normal_quantile(0.5 * (1.0 + p));
    Ok(z * z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

    /// Bisection on an independent CDF implementation.
    fn invert(cdf: impl Fn(f64) -> f64, p: f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn normal_quantile_matches_cdf_inversion() {
        let n = Normal::new(0.0, 1.0).unwrap();
        for p in [
            1e-12, 1e-6, 0.001, 0.025, 0.1, 0.3, 0.5, 0.7, 0.9, 0.975, 0.999, 0.999_999,
        ] {
            let oracle = invert(|x| n.cdf(x), p, -10.0, 10.0);
            let got = normal_quantile(p);
            assert!(
                (got - oracle).abs() < 1e-9 * (1.0 + oracle.abs()),
                "p={p}: {got} vs {oracle}"
            );
        }
        assert!((normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-12);
    }

    #[test]
    fn chi2_matches_cdf_inversion() {
        let c = ChiSquared::new(1.0).unwrap();
        for p in [0.01, 0.5, 0.9, 0.95, 0.99] {
            let oracle = invert(|x| c.cdf(x), p, 0.0, 50.0);
            let got = chi2_quantile_df1(p).unwrap();
            assert!((got - oracle).abs() < 1e-8, "p={p}: {got} vs {oracle}");
        }
        assert!((chi2_quantile_df1(0.95).unwrap() - 3.841459).abs() < 1e-6);
        assert!((chi2_quantile_df1(0.99).unwrap() - 6.634897).abs() < 1e-6);
        assert!(chi2_quantile_df1(1e-12).unwrap() < 1e-20);
    }

    #[test]
    fn chi2_rejects_bad_probabilities() {
        for p in [0.0, 1.0, -0.5, 2.0, f64::NAN] {
            assert!(chi2_quantile_df1(p).is_err());
        }
    }
}
