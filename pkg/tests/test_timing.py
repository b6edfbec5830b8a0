import pytest

from gafocus import timing


@pytest.fixture
def v5():
    return timing.get_profile("virtex5")


@pytest.fixture
def usp():
    return timing.get_profile("ultrascale-plus")


@pytest.fixture
def pc():
    return timing.get_profile("pc-matlab")


class TestOffspringTime:
    def test_virtex5_measured(self, v5):
        assert timing.offspring_time(v5) == 420.0 + 31.0 + 10.0 == 461.0

    def test_virtex5_derived(self, v5):
        derived = timing.derived(v5)
        assert derived.n_chunks == 1024 * 768 // 128 == 6144
        assert timing.mask_generation_time(derived) == pytest.approx(491.52, abs=1e-9)
        assert timing.offspring_time(derived) == pytest.approx(532.52, abs=1e-9)

    def test_ultrascale_derived(self, usp):
        assert timing.mask_generation_time(usp) == pytest.approx(61.44, abs=1e-9)
        assert timing.offspring_time(usp) == pytest.approx(102.44, abs=1e-9)


class TestIterationTime:
    def test_virtex5_exact(self, v5):
        assert timing.iteration_time(v5) == 16 * 461.0 == 7376.0

    def test_virtex5_nominal_8ms(self, v5):
        assert timing.iteration_time(v5, nominal=True) == 16 * 500.0 == 8000.0

    def test_population_one(self, v5):
        import dataclasses

        single = dataclasses.replace(v5, population=1)
        assert timing.iteration_time(single) == timing.offspring_time(single)

    def test_pc_override(self, pc):
        assert timing.iteration_time(pc) == 1.2e6
        assert timing.iteration_time(pc, nominal=True) == 1.2e6


class TestTotalTime:
    def test_zero_iterations_init_only(self, v5):
        assert timing.total_time(v5, 0) == 43.0

    def test_500_iterations_nominal_4s(self, v5):
        assert 500 * timing.iteration_time(v5, nominal=True) == 4.0e6  # exactly 4.0 s of iterations
        assert timing.total_time(v5, 500, nominal=True) == 4.0e6 + 43.0

    def test_2000_iterations_nominal_16s(self, v5):
        # the model reports 16 s for 2000 x 8 ms (plus init)
        assert timing.total_time(v5, 2000, nominal=True) == 16.0e6 + 43.0

    def test_affine_in_iterations(self, v5):
        it = timing.iteration_time(v5)
        for k in (0, 1, 7, 499, 1999):
            assert timing.total_time(v5, k + 1) - timing.total_time(v5, k) == it

    def test_negative_rejected(self, v5):
        with pytest.raises(ValueError):
            timing.total_time(v5, -1)


class TestSpeedup:
    def test_pc_vs_virtex5_nominal_150(self, pc, v5):
        assert timing.speedup(pc, v5) == 150.0

    def test_chunk_generation_8x(self, v5, usp):
        assert timing.speedup(v5.chunk_gen_ns, usp.chunk_gen_ns) == 8.0

    def test_identity(self, v5):
        assert timing.speedup(v5, v5) == 1.0

    def test_invalid(self):
        with pytest.raises(ValueError):
            timing.speedup(0.0, 1.0)


class TestReport:
    def test_totals_have_no_hidden_terms(self, v5):
        rep = timing.report(v5, 2000)
        assert rep.total_s == timing.total_time(v5, 2000) / 1e6
        assert rep.nominal_total_s == timing.total_time(v5, 2000, nominal=True) / 1e6
        assert rep.per_iteration_ms == 7.376
        assert rep.nominal_per_iteration_ms == 8.0

    def test_measurement_rate(self, v5):
        rep = timing.report(v5, 1)
        assert rep.measurement_rate_hz == pytest.approx(16 / 7376e-6, rel=1e-12)

    def test_pc_report(self, pc):
        rep = timing.report(pc, 10)
        assert rep.per_iteration_ms == 1200.0
        assert rep.per_offspring_us == pytest.approx(1.2e6 / 16)


class TestProfiles:
    def test_builtin_names(self):
        assert set(timing.builtin_profiles()) == {"virtex5", "ultrascale-plus", "pc-matlab"}

    def test_unknown_profile_lists_available(self):
        with pytest.raises(KeyError) as err:
            timing.get_profile("zynq")
        message = str(err.value)
        assert "virtex5" in message and "pc-matlab" in message

    def test_validation(self):
        with pytest.raises(ValueError):
            timing.HardwareProfile(name="bad", chunk_bits=100)  # does not divide 786432
        with pytest.raises(ValueError):
            timing.HardwareProfile(name="bad", chunk_gen_ns=0.0)
        with pytest.raises(ValueError):
            timing.HardwareProfile(name="bad", population=0)
        with pytest.raises(ValueError):
            timing.HardwareProfile(name="bad", offspring_mask_us=-5.0)

    def test_load_profile_file(self, tmp_path):
        path = tmp_path / "myboard.profile"
        path.write_text(
            "# test platform\n"
            "chunk_gen_ns=40\n"
            "population=8\n"
            "init_us=10\n"
        )
        p = timing.load_profile(str(path))
        assert p.name == "myboard"
        assert p.population == 8
        assert timing.mask_generation_time(p) == pytest.approx(6144 * 40 / 1000)

    def test_load_profile_unknown_key(self, tmp_path):
        path = tmp_path / "bad.profile"
        path.write_text("voltage=3.3\n")
        with pytest.raises(ValueError):
            timing.load_profile(str(path))

    def test_resolve_profile(self, tmp_path):
        assert timing.resolve_profile("virtex5").name == "virtex5"
        path = tmp_path / "alt.profile"
        path.write_text("chunk_gen_ns=20\n")
        assert timing.resolve_profile(str(path)).name == "alt"
        with pytest.raises(KeyError):
            timing.resolve_profile("missing-board")
