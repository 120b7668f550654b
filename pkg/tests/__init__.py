# Test suite for cubictele
