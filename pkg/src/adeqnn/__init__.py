"""Simulator and experiments for a photonic quantum neural network whose nonlinear
layers come from post-selecting extra path modes.

Modules: ``qcore`` (state-vector primitives), ``circuit`` (the 81-parameter chip
model), ``train`` (SPSA with AMSGrad / RMSProp), ``datasets``, ``metrics``,
``tasks`` (classification, patched GAN, diffusion denoiser) and ``cli``.
"""

__version__ = "0.1.0"
