# Tests package for BUGS regression
