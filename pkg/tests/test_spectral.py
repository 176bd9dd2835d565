import numpy as np
import pytest
from scipy.ndimage import gaussian_filter

from diffpaint.schedule import GaussianNoiseSource, linear_beta_schedule
from diffpaint.spectral import (
    RadialSpectrum,
    corruption_profile,
    expected_noise_spectrum,
    highband_energy,
    profile_summary,
    profile_to_csv,
    radial_power_spectrum,
    render_heat_table,
    sampled_noise_spectrum,
)


@pytest.fixture(scope="module")
def sched():
    return linear_beta_schedule(250)


class TestRadialPowerSpectrum:
    def test_white_noise_is_flat_across_bands(self):
        rng = GaussianNoiseSource(0)
        acc = np.zeros(16)
        for _ in range(100):
            spec = radial_power_spectrum(rng.normal((64, 64)), n_bands=16)
            acc += spec.power
        mean_per_band = acc / 100
        overall = mean_per_band.mean()
        assert np.all(np.abs(mean_per_band - overall) < 0.2 * overall)

    def test_constant_image_has_no_band_power(self):
        spec = radial_power_spectrum(np.full((32, 32), 0.7), n_bands=8)
        assert np.allclose(spec.power, 0.0, atol=1e-20)

    def test_pure_sinusoid_concentrates_in_one_band(self):
        n = 64
        yy, xx = np.mgrid[0:n, 0:n]
        image = np.sin(2 * np.pi * 6 * xx / n)  # radius-6 frequency pair
        spec = radial_power_spectrum(image, n_bands=16)
        # edges are multiples of 2, so radius 6 falls in band (4, 6] -> index 2
        band_power = spec.power * spec.counts
        assert band_power[2] / band_power.sum() >= 0.9

    def test_parseval_total_power(self):
        rng = GaussianNoiseSource(1)
        image = rng.normal((48, 40)) + 0.3
        spec = radial_power_spectrum(image, n_bands=12)
        total = spec.total_power()
        assert total == pytest.approx(image.var(), rel=1e-6)

    def test_band_edges_cover_zero_to_nyquist(self):
        spec = radial_power_spectrum(np.zeros((32, 48)), n_bands=8)
        assert spec.band_edges[0] == 0.0
        assert spec.band_edges[-1] == pytest.approx(16.0)  # min(32, 48) / 2
        assert spec.counts.sum() == 32 * 48 - 1  # every non-DC bin lands in a band

    def test_too_small_image_rejected(self):
        with pytest.raises(ValueError):
            radial_power_spectrum(np.zeros((4, 4)))

    def test_too_few_bands_rejected(self):
        with pytest.raises(ValueError):
            radial_power_spectrum(np.zeros((32, 32)), n_bands=3)

    def test_channel_images_accepted(self):
        spec = radial_power_spectrum(np.zeros((16, 16, 3)), n_bands=4)
        assert spec.n_bands == 4


class TestNoiseSpectra:
    def test_expected_matches_sampled(self):
        analytic = expected_noise_spectrum(32, 32, n_bands=8)
        sampled = sampled_noise_spectrum(32, 32, n_bands=8, rng=GaussianNoiseSource(2), draws=200)
        assert np.allclose(sampled.power, analytic.power, rtol=0.15)

    def test_flat_level(self):
        spec = expected_noise_spectrum(16, 24, n_bands=6, sigma=2.0)
        assert np.allclose(spec.power, 4.0 / (16 * 24))


class TestCorruptionProfile:
    def synthetic_power_law(self, n_bands=12):
        edges = np.linspace(0.0, 16.0, n_bands + 1)
        centers = 0.5 * (edges[1:] + edges[:-1])
        power = 1.0 / centers**2
        counts = np.ones(n_bands)
        return RadialSpectrum(band_edges=edges, power=power, counts=counts)

    def flat_noise(self, n_bands=12, level=1.0 / 256):
        edges = np.linspace(0.0, 16.0, n_bands + 1)
        return RadialSpectrum(
            band_edges=edges, power=np.full(n_bands, level), counts=np.ones(n_bands)
        )

    def test_snr_strictly_decreasing_in_t(self, sched):
        profile = corruption_profile(self.synthetic_power_law(), sched, self.flat_noise())
        assert np.all(np.diff(profile.snr, axis=1) < 0)

    def test_crossover_non_increasing_with_frequency(self, sched):
        profile = corruption_profile(self.synthetic_power_law(), sched, self.flat_noise())
        assert np.all(np.diff(profile.crossover) <= 0)

    def test_snr_vanishes_at_top_of_schedule(self, sched):
        profile = corruption_profile(self.synthetic_power_law(), sched, self.flat_noise())
        ab_T = sched.alpha_bar[250]
        ratio = self.synthetic_power_law().power / self.flat_noise().power
        assert np.allclose(profile.snr[:, -1], ratio * ab_T / (1 - ab_T))
        assert np.all(profile.snr[:, -1] < profile.snr[:, 0] * 1e-2)

    def test_equal_power_crossover_at_half_alpha_bar(self, sched):
        n_bands = 4
        edges = np.linspace(0.0, 8.0, n_bands + 1)
        same = RadialSpectrum(edges, np.full(n_bands, 0.25), np.ones(n_bands))
        profile = corruption_profile(same, sched, same)
        expected_t = int(np.nonzero(sched.alpha_bar[1:] <= 0.5)[0][0]) + 1
        assert np.all(profile.crossover == expected_t)

    def test_crossover_never_reported_as_T_plus_one(self):
        sched2 = linear_beta_schedule(2)  # alpha_bar stays near 1
        n_bands = 4
        edges = np.linspace(0.0, 8.0, n_bands + 1)
        strong = RadialSpectrum(edges, np.full(n_bands, 1e6), np.ones(n_bands))
        weak = RadialSpectrum(edges, np.full(n_bands, 1e-6), np.ones(n_bands))
        profile = corruption_profile(strong, sched2, weak)
        assert np.all(profile.crossover == 3)

    def test_zero_noise_band_rejected(self, sched):
        bad = RadialSpectrum(
            self.flat_noise().band_edges, np.zeros(12), np.ones(12)
        )
        with pytest.raises(ValueError):
            corruption_profile(self.synthetic_power_law(), sched, bad)

    def test_mismatched_band_grid_rejected(self, sched):
        other = RadialSpectrum(np.linspace(0, 8, 13), np.ones(12), np.ones(12))
        with pytest.raises(ValueError):
            corruption_profile(self.synthetic_power_law(), sched, other)

    def test_exports(self, sched):
        profile = corruption_profile(self.synthetic_power_law(), sched, self.flat_noise())
        csv_text = profile_to_csv(profile)
        assert csv_text.splitlines()[0] == "band,t,snr"
        assert len(csv_text.splitlines()) == 1 + 12 * 250
        summary = profile_summary(profile)
        assert set(summary["crossover"]) == {str(k) for k in range(12)}
        table = render_heat_table(profile)
        assert "band  0" in table and "crossover" in table


class TestHighbandEnergy:
    def test_constant_image_is_zero(self):
        assert highband_energy(np.full((16, 16), -0.25), 0.5) == 0.0

    def test_white_noise_matches_bin_count_fraction(self):
        # expected value: fraction of non-DC frequency bins above the cutoff
        n = 32
        fy = np.fft.fftfreq(n) * n
        radius = np.sqrt(fy[:, None] ** 2 + fy[None, :] ** 2)
        cutoff_radius = 0.5 * (n / 2)
        expected = np.count_nonzero(radius > cutoff_radius) / (n * n - 1)
        rng = GaussianNoiseSource(3)
        values = [highband_energy(rng.normal((n, n)), 0.5) for _ in range(100)]
        assert np.mean(values) == pytest.approx(expected, rel=0.10)

    def test_blur_strictly_reduces_highband_energy(self):
        rng = GaussianNoiseSource(4)
        for _ in range(20):
            image = rng.normal((32, 32))
            blurred = gaussian_filter(image, sigma=1.0)
            assert highband_energy(blurred, 0.4) < highband_energy(image, 0.4)

    def test_cutoff_validation(self):
        with pytest.raises(ValueError):
            highband_energy(np.zeros((16, 16)), 1.5)
