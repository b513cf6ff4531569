"""
Liver module for the hjortic engine.
Contains the liver-index computations and the bivariate gamma-copula model.
"""
