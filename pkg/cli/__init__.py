"""
Command-line module for the hjortic engine.
Contains the subcommand handlers and the synthetic-data generator.
"""
