# Integration Test Suite - CleanBox
