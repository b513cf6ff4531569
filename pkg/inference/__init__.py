"""
Inference module for the hjortic engine.
Contains model selection (AIC/BIC/FIC), monitoring diagnostics, and
confidence distributions.
"""
