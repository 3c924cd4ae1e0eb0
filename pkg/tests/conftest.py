import pytest

from probseg.pipeline import desk_profile, run_all
from probseg.training import TrainConfig
from probseg.volume import Plane


def mini_config(data_root, seed=1, **overrides):
    """Smallest complete pipeline: 6 phantoms, 1 plane, 2 folds, 2 epochs."""
    base = dict(n_patients=6, n_test=2, fold_count=2,
                planes=(Plane.AXIAL,),
                train=TrainConfig(epochs=2, warmup_epochs=0))
    base.update(overrides)
    return desk_profile(data_root, seed=seed, **base)


@pytest.fixture(scope="session")
def mini_run(tmp_path_factory):
    """One completed mini pipeline shared by pipeline/server tests."""
    root = tmp_path_factory.mktemp("mini_pipeline")
    cfg = mini_config(root)
    run_all(cfg)
    return cfg


@pytest.fixture
def announce(request):
    """Print past output capture, so verdict lines land in the run log
    even without -s."""
    cap = request.config.pluginmanager.getplugin("capturemanager")

    def _announce(text):
        with cap.global_and_fixture_disabled():
            print(text)

    return _announce
