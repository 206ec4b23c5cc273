# Copyright 2026 The stftpr Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Phase retrieval from STFT magnitudes."""

from ._core import (
    DimensionError,
    Error,
    InvalidInputError,
    ProblemConfig,
    __version__,
    add_noise,
    gd_recover,
    gla_recover,
    gradient,
    loss,
    ls_init,
    make_config,
    measure,
    recursive_recovery,
    relative_error,
    run_experiment,
    unit_modulus_init,
)

__all__ = [
    "DimensionError",
    "Error",
    "InvalidInputError",
    "ProblemConfig",
    "__version__",
    "add_noise",
    "gd_recover",
    "gla_recover",
    "gradient",
    "loss",
    "ls_init",
    "make_config",
    "measure",
    "recursive_recovery",
    "relative_error",
    "run_experiment",
    "unit_modulus_init",
]
