# Unit Test Suite - CleanBox
