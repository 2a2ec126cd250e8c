"""
Tests for sampling, level datasets, the surrogate and per-level training
"""

import numpy as np
import pytest

from mlnn.models import CostLedger
from mlnn.multilevel.dataset import LevelDataset, collect_samples, split_indices
from mlnn.multilevel.hyperparameters import (
    Hyperparameters,
    level2_grid,
    transfer_grid,
    widths,
)
from mlnn.multilevel.levels import (
    LevelContext,
    enrich_until_valid,
    grid_search,
    search_grid,
    train_level,
)
from mlnn.multilevel.sampling import batch_size, holdout_z, sample_z
from mlnn.multilevel.surrogate import Surrogate, rms, should_add_level, surrogate_eval
from mlnn.nn.network import Batch, build_network
from mlnn.nn.training import TrainingResult
from mlnn.solvers.grid import GridHierarchy
from mlnn.solvers.problems import SolverProblem
from mlnn.utils.config import SearchConfig
from mlnn.utils.exceptions import (
    EnrichmentError,
    GridSearchError,
    TrainingDivergenceError,
    ValidationError,
)


class OracleMap:
    """Error map returning the true inter-level error at z."""

    def __init__(self, problem, hierarchy, level):
        self.problem = problem
        self.hierarchy = hierarchy
        self.level = level

    def restricted(self, z, level):
        solution = self.problem.solve(z, self.hierarchy.intervals(level))
        return self.hierarchy.restrict(solution.values, level)

    def predict(self, field, z):
        return self.restricted(z, self.level) - self.restricted(z, self.level - 1)


class ConstantMap:
    def __init__(self, value):
        self.value = value

    def predict(self, field, z):
        return np.full_like(field, self.value)


def fake_result(net, v):
    return TrainingResult(
        network=net,
        validation_error=v,
        raw_validation_error=v,
        epochs=1,
        first_loss=1.0,
        final_loss=v,
        metadata={"work": 1.0},
    )


@pytest.fixture
def diffusion_problem():
    return SolverProblem("diffusion", np.array([[0.0, 1.0]]))


class TestSampling:
    """Test parameter sampling."""

    def test_shape_and_bounds(self):
        """Draws have shape [count, dim] and stay in the box."""
        z = sample_z([[1.0, 2.0], [10.0, 20.0]], 50, seed=3)
        assert z.shape == (50, 2)
        assert np.all((z[:, 0] >= 1.0) & (z[:, 0] <= 2.0))
        assert np.all((z[:, 1] >= 10.0) & (z[:, 1] <= 20.0))

    def test_reproducible(self):
        """The same seed gives the same points."""
        np.testing.assert_array_equal(sample_z([[0, 1]], 5, 9), sample_z([[0, 1]], 5, 9))

    def test_holdout_uses_its_own_stream(self):
        """Held-out points differ from build points of the same seed."""
        assert not np.allclose(holdout_z([[0, 1]], 5, 9), sample_z([[0, 1]], 5, 9))

    def test_zero_count(self):
        """At least one sample must be drawn."""
        with pytest.raises(ValidationError):
            sample_z([[0, 1]], 0, 1)

    @pytest.mark.parametrize(
        "level,dim,expected", [(2, 1, 10), (3, 1, 2), (2, 2, 100), (4, 2, 4)]
    )
    def test_batch_size(self, level, dim, expected):
        """10**dim samples on level 2, 2**dim above."""
        assert batch_size(level, dim) == expected


class TestSplit:
    """Test the 80/20 split."""

    @pytest.mark.parametrize("count,n_val", [(10, 2), (11, 3), (2, 1), (20, 4)])
    def test_sizes(self, count, n_val):
        """The validation part has ceil(0.2 n) samples, at least one."""
        train, val = split_indices(count, seed=5)
        assert len(val) == n_val
        assert len(train) == count - n_val
        assert sorted(np.concatenate([train, val]).tolist()) == list(range(count))

    def test_single_sample(self):
        """One sample cannot be split."""
        with pytest.raises(ValidationError):
            split_indices(1, seed=0)


class TestHyperparameters:
    """Test hyperparameter grids."""

    def test_level2_grid_size(self):
        """The default grid has 3**4 cells."""
        grid = level2_grid(SearchConfig(), 100)
        assert len(grid) == 81
        assert {hp.width for hp in grid} == {50, 100, 200}

    def test_transfer_grid_size(self):
        """Transfer levels search 3**2 cells."""
        grid = transfer_grid(SearchConfig(), 100)
        assert len(grid) == 9
        assert all(hp.transfer for hp in grid)

    def test_widths_floor_and_dedupe(self):
        """Widths are floor(factor * N1), at least 1, without duplicates."""
        assert widths([0.5, 1.0, 2.0], 1) == [1, 2]
        assert widths([0.5, 1.0], 7) == [3, 7]

    def test_round_trip(self):
        """Cells survive to_dict/from_dict."""
        hp = Hyperparameters(1e-3, 2, 3, 50)
        assert Hyperparameters.from_dict(hp.to_dict()) == hp

    def test_fresh_higher_level_needs_base(self, quick_config):
        """Without transfer a level-3 grid reuses the level-2 architecture."""
        with pytest.raises(ValidationError):
            search_grid(3, quick_config, None, transfer=False)
        base = Hyperparameters(0.0, 1, 1, 8)
        grid = search_grid(3, quick_config, base, transfer=False)
        assert grid == [Hyperparameters(0.0, 1, 1, 8)]


class TestSurrogate:
    """Test surrogate evaluation."""

    def test_coarse_only(self, ad_problem):
        """Without maps the surrogate is the restricted coarse solve."""
        grids = GridHierarchy(50, 3)
        surrogate = Surrogate(ad_problem, grids)
        coarse = grids.restrict(ad_problem.solve(np.array([10.0]), 50).values, 1)
        np.testing.assert_array_equal(surrogate_eval(surrogate, np.array([10.0])), coarse)

    def test_oracle_maps_telescope(self, ad_problem):
        """True inter-level errors reproduce u(5) on X(1) at 20 random z."""
        grids = GridHierarchy(100, 5)
        maps = [OracleMap(ad_problem, grids, level) for level in range(2, 6)]
        surrogate = Surrogate(ad_problem, grids, maps)
        for z in sample_z(ad_problem.bounds, 20, seed=5):
            fine = grids.restrict(ad_problem.solve(z, grids.intervals(5)).values, 5)
            assert np.max(np.abs(surrogate_eval(surrogate, z) - fine)) <= 1e-12

    def test_zero_maps_change_nothing(self, ad_problem):
        """Zero corrections leave the coarse field."""
        grids = GridHierarchy(50, 3)
        surrogate = Surrogate(ad_problem, grids, [ConstantMap(0.0), ConstantMap(0.0)])
        levels = surrogate.evaluate_levels(np.array([10.0]))
        assert len(levels) == 3
        np.testing.assert_array_equal(levels[0], levels[2])

    def test_evaluation_is_charged(self, ad_problem, ledger):
        """Every evaluation costs one coarse solve and one forward pass per map."""
        surrogate = Surrogate(ad_problem, GridHierarchy(50, 3), [ConstantMap(0.0)] * 2, ledger=ledger)
        surrogate.evaluate(np.array([10.0]))
        surrogate.evaluate(np.array([20.0]))
        assert ledger.coarse_solves == 2
        assert ledger.network_evaluations == 4

    def test_truncated(self, ad_problem):
        """A truncated surrogate keeps the first maps."""
        surrogate = Surrogate(ad_problem, GridHierarchy(50, 4), [ConstantMap(1.0), ConstantMap(2.0)])
        assert surrogate.truncated(2).n_levels == 2
        assert surrogate.truncated(2).maps[0].value == 1.0

    def test_rms(self):
        """RMS is the 2-norm over sqrt(length)."""
        assert rms(np.array([3.0, 4.0])) == pytest.approx(5.0 / np.sqrt(2.0))

    def test_should_add_level(self):
        """A level is added while some correction exceeds epsilon_acc."""
        batch = Batch(np.zeros((3, 5)), np.zeros((3, 1)), np.zeros((3, 5)))
        assert not should_add_level(ConstantMap(1e-9), batch, 1e-6)
        assert should_add_level(ConstantMap(1e-3), batch, 1e-6)


class TestDatasets:
    """Test level datasets."""

    def test_level2_pairs(self, ad_problem, ledger):
        """Level-2 inputs are u(1)|X1, targets u(2)|X1 - u(1)|X1."""
        grids = GridHierarchy(50, 3)
        zs = np.array([[10.0], [20.0], [30.0], [40.0], [50.0]])
        samples = collect_samples(2, zs, ad_problem, grids, Surrogate(ad_problem, grids), ledger)
        z = zs[1]
        u1 = grids.restrict(ad_problem.solve(z, 50).values, 1)
        u2 = grids.restrict(ad_problem.solve(z, 100).values, 2)
        np.testing.assert_array_equal(samples.inputs[1], u1)
        np.testing.assert_array_equal(samples.solutions[1], u2)
        dataset = LevelDataset.from_samples(samples, seed=1)
        assert len(dataset.training) == 4 and len(dataset.validation) == 1
        k = int(dataset.validation_index[0])
        np.testing.assert_allclose(
            dataset.validation.targets[0], samples.solutions[k] - samples.inputs[k]
        )
        assert ledger.sample_counts == {2: 5}
        assert ledger.solve_counts == {2: 10}

    def test_level3_uses_surrogate_inputs(self, ad_problem):
        """Above level 2 the input is the partial surrogate, not a solve."""
        grids = GridHierarchy(50, 3)
        surrogate = Surrogate(ad_problem, grids, [ConstantMap(0.5)])
        samples = collect_samples(3, np.array([[10.0]]), ad_problem, grids, surrogate)
        u1 = grids.restrict(ad_problem.solve(np.array([10.0]), 50).values, 1)
        np.testing.assert_allclose(samples.inputs[0], u1 + 0.5)

    def test_surrogate_depth_checked(self, ad_problem):
        """Level-i samples need an (i-1)-level surrogate."""
        grids = GridHierarchy(50, 3)
        with pytest.raises(ValidationError):
            collect_samples(3, np.array([[10.0]]), ad_problem, grids, Surrogate(ad_problem, grids))

    def test_solver_failure_names_z(self, ad_problem):
        """A failed solve reports the parameter point and level."""
        grids = GridHierarchy(20, 3)
        with pytest.raises(ValidationError) as info:
            collect_samples(2, np.array([[100.0]]), ad_problem, grids, Surrogate(ad_problem, grids))
        assert info.value.details["z"] == [100.0]
        assert info.value.details["level"] == 2


@pytest.fixture
def level2_dataset(diffusion_problem):
    grids = GridHierarchy(8, 3)
    zs = sample_z(diffusion_problem.bounds, 10, 0)
    samples = collect_samples(2, zs, diffusion_problem, grids, Surrogate(diffusion_problem, grids))
    return LevelDataset.from_samples(samples, seed=0)


class TestTrainLevel:
    """Test per-level training and the grid search."""

    def test_fresh_network_shape(self, level2_dataset, quick_config):
        """Level 2 builds a network from the cell's architecture."""
        hp = Hyperparameters(0.0, 2, 1, 6)
        cfg = quick_config.training
        cfg.max_epochs = 3
        result = train_level(2, level2_dataset, hp, None, cfg, seed=1)
        assert len(result.network.conv_layers) == 2
        assert result.network.fc_layers[0].n_out == 6
        assert result.network.input_shape == (1, 9)

    def test_transfer_needs_previous_map(self, level2_dataset, quick_config):
        """A transfer cell without P(i-1) is rejected."""
        hp = Hyperparameters(0.0, width=4, transfer=True)
        with pytest.raises(ValidationError):
            train_level(3, level2_dataset, hp, None, quick_config.training, seed=1)

    def test_transfer_extends_previous(self, level2_dataset, quick_config, small_network):
        """A transfer cell freezes P(i-1) and trains two new layers."""
        cfg = quick_config.training
        cfg.max_epochs = 3
        hp = Hyperparameters(0.0, width=4, transfer=True)
        result = train_level(3, level2_dataset, hp, small_network, cfg, seed=1)
        assert result.network.parameter_count(trainable_only=True) == (4 * 9 + 4) + (9 * 4 + 9)

    def test_best_cell_wins(self, mocker, level2_dataset, quick_config, ledger):
        """The smallest validation error wins; training work is charged."""
        scores = {1: 0.3, 2: 0.1, 3: 0.2}

        def fake(level, dataset, hp, prev, cfg, seed, warm_start=None):
            return fake_result(build_network((1, 9), 1, 0, 1, hp.width, 0), scores[hp.width])

        mocker.patch("mlnn.multilevel.levels.train_level", side_effect=fake)
        grid = [Hyperparameters(0.0, 0, 1, w) for w in (1, 2, 3)]
        result = grid_search(2, level2_dataset, None, quick_config, 0, grid=grid, ledger=ledger)
        assert result.hp.width == 2
        assert result.v_min == 0.1
        assert ledger.training_work == {2: 3.0}

    def test_tie_goes_to_fewer_parameters(self, mocker, level2_dataset, quick_config):
        """Equal validation errors prefer the smaller network."""

        def fake(level, dataset, hp, prev, cfg, seed, warm_start=None):
            return fake_result(build_network((1, 9), 1, 0, 1, hp.width, 0), 0.5)

        mocker.patch("mlnn.multilevel.levels.train_level", side_effect=fake)
        grid = [Hyperparameters(0.0, 0, 1, w) for w in (8, 2, 5)]
        result = grid_search(2, level2_dataset, None, quick_config, 0, grid=grid)
        assert result.hp.width == 2

    def test_diverged_cells_are_skipped(self, mocker, level2_dataset, quick_config):
        """Diverged cells are recorded; the rest still compete."""

        def fake(level, dataset, hp, prev, cfg, seed, warm_start=None):
            if hp.lam > 0:
                raise TrainingDivergenceError("nan", 3)
            return fake_result(build_network((1, 9), 1, 0, 1, 2, 0), 0.4)

        mocker.patch("mlnn.multilevel.levels.train_level", side_effect=fake)
        grid = [Hyperparameters(1e-3, 0, 1, 2), Hyperparameters(0.0, 0, 1, 2)]
        result = grid_search(2, level2_dataset, None, quick_config, 0, grid=grid)
        assert result.hp.lam == 0.0
        assert result.cells[0].error is not None

    def test_all_diverged(self, mocker, level2_dataset, quick_config):
        """GridSearchError when no cell trained."""
        mocker.patch(
            "mlnn.multilevel.levels.train_level",
            side_effect=TrainingDivergenceError("nan", 1),
        )
        with pytest.raises(GridSearchError) as info:
            grid_search(2, level2_dataset, None, quick_config, 0, grid=[Hyperparameters(0.0, 0, 1, 2)])
        assert len(info.value.failures) == 1


class TestEnrichment:
    """Test the enrichment loop with a scripted trainer."""

    def context(self, problem, config, ledger):
        grids = GridHierarchy(config.problem.n_coarse, 3)
        return LevelContext(problem, grids, Surrogate(problem, grids), config, ledger, seed=4)

    def test_rounds_until_threshold(self, mocker, diffusion_problem, quick_config, ledger):
        """Samples grow by 10 per round until v_min < epsilon."""

        def fake(level, dataset, hp, prev, cfg, seed, warm_start=None):
            return fake_result(build_network((1, 9), 1, 0, 1, 2, 0), 1.0 / dataset.size)

        mocker.patch("mlnn.multilevel.levels.train_level", side_effect=fake)
        outcome = enrich_until_valid(2, self.context(diffusion_problem, quick_config, ledger), 0.06)
        assert outcome.rounds == 2
        assert outcome.dataset.size == 20
        assert outcome.v_history == [0.1, 0.05]
        assert ledger.sample_counts == {2: 20}
        assert outcome.to_dict()["samples"] == 20

    def test_warm_starts_are_passed(self, mocker, diffusion_problem, quick_config, ledger):
        """From the second round on each cell continues from its last network."""
        net = build_network((1, 9), 1, 0, 1, 2, 0)
        calls = []

        def fake(level, dataset, hp, prev, cfg, seed, warm_start=None):
            calls.append(warm_start)
            return fake_result(net, 1.0 / dataset.size)

        mocker.patch("mlnn.multilevel.levels.train_level", side_effect=fake)
        enrich_until_valid(2, self.context(diffusion_problem, quick_config, ledger), 0.06)
        assert calls[0] is None
        assert calls[1] is net

    def test_round_cap(self, mocker, diffusion_problem, quick_config, ledger):
        """EnrichmentError after max_rounds rounds above epsilon."""

        def fake(level, dataset, hp, prev, cfg, seed, warm_start=None):
            return fake_result(build_network((1, 9), 1, 0, 1, 2, 0), 1.0)

        mocker.patch("mlnn.multilevel.levels.train_level", side_effect=fake)
        with pytest.raises(EnrichmentError) as info:
            enrich_until_valid(2, self.context(diffusion_problem, quick_config, ledger), 0.5)
        assert info.value.v_history == [1.0, 1.0, 1.0]
        assert ledger.sample_counts == {2: 30}

    def test_same_seed_same_samples(self, mocker, diffusion_problem, quick_config):
        """Sample draws depend only on the seed."""

        def fake(level, dataset, hp, prev, cfg, seed, warm_start=None):
            return fake_result(build_network((1, 9), 1, 0, 1, 2, 0), 0.0)

        mocker.patch("mlnn.multilevel.levels.train_level", side_effect=fake)
        a = enrich_until_valid(2, self.context(diffusion_problem, quick_config, CostLedger()), 0.5)
        b = enrich_until_valid(2, self.context(diffusion_problem, quick_config, CostLedger()), 0.5)
        np.testing.assert_array_equal(np.stack(a.dataset.samples.z), np.stack(b.dataset.samples.z))
