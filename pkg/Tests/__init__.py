"""Test suite for mlnn"""
