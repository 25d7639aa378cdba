predicate sorted (a:array<int>)
	requires a != null
	reads a

method bubbleSort (a: array<int>)
	requires a != null
	modifies a
	ensures sorted(a)
