"""
Time-series module for the hjortic engine.
Contains the annual frame data model, the Gaussian autoregressive regression
engine, and time-varying autoregressive processes.
"""
