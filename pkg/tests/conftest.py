import warnings

from hypothesis import settings

warnings.filterwarnings("ignore", message=".*TBB.*")
settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")
